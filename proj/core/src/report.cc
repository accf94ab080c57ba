#include "csslab/report.h"

#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "csslab/config.h"
#include "csslab/errors.h"
#include "csslab/svg.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "report";

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string csv_num(const std::optional<double>& v) {
  if (!v) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *v);
  return std::string(buf, ptr);
}

std::string csv_num(double v) { return csv_num(std::optional<double>(v)); }

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

}  // namespace

json metrics_to_json(const MetricsReport& report) {
  json iou = json::array();
  for (const auto& v : report.class_iou) iou.push_back(optional_to_json(v));
  return {{"step", report.step},
          {"class_iou", iou},
          {"miou_init", optional_to_json(report.miou_init)},
          {"miou_incr", optional_to_json(report.miou_incr)},
          {"miou_all", optional_to_json(report.miou_all)}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.step = j.at("step").get<int>();
  for (const auto& v : j.at("class_iou")) {
    r.class_iou.push_back(optional_from_json(v));
  }
  r.miou_init = optional_from_json(j.at("miou_init"));
  r.miou_incr = optional_from_json(j.at("miou_incr"));
  r.miou_all = optional_from_json(j.at("miou_all"));
  return r;
}

std::string display_name(const ExperimentLog& log) {
  if (!log.config.name.empty()) return log.config.name;
  return std::string(to_string(log.config.strategy)) + "-seed" +
         std::to_string(log.config.seed);
}

json log_to_json(const ExperimentLog& log) {
  json config = json::object();
  for (const auto& [k, v] : config_entries(log.config)) config[k] = v;
  json schedule = json::array();
  for (const auto& c : log.schedule.steps) schedule.push_back(c);
  json steps = json::array();
  for (const auto& s : log.steps) {
    steps.push_back(
        {{"step", s.step},
         {"observed", metrics_to_json(s.observed)},
         {"probing", s.probing ? metrics_to_json(*s.probing) : json(nullptr)},
         {"trainable_params", s.trainable_params},
         {"seconds", s.seconds}});
  }
  json md = json::array();
  for (const auto& r : log.md) {
    md.push_back({{"source", std::string(to_string(r.source))},
                  {"t", r.t},
                  {"k", r.k},
                  {"value", r.value}});
  }
  json final_triple = json::object();
  if (!log.steps.empty()) {
    const auto& f = log.final_observed();
    final_triple = {{"miou_init", optional_to_json(f.miou_init)},
                    {"miou_incr", optional_to_json(f.miou_incr)},
                    {"miou_all", optional_to_json(f.miou_all)}};
  }
  return {{"schema_version", kLogSchemaVersion},
          {"name", display_name(log)},
          {"seed", log.config.seed},
          {"strategy", std::string(to_string(log.config.strategy))},
          {"setting", log.config.setting},
          {"scenario", std::string(to_string(log.schedule.scenario))},
          {"total_fg_classes", log.schedule.total_fg_classes},
          {"schedule", schedule},
          {"config", config},
          {"step1_from_cache", log.step1_from_cache},
          {"steps", steps},
          {"final", final_triple},
          {"incremental_seconds", log.incremental_seconds()},
          {"avg_trainable_params", log.avg_trainable_params()},
          {"md", md}};
}

ExperimentLog log_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kLogSchemaVersion) {
      throw Error(kModule, ErrorKind::kFormat, "unsupported schema_version");
    }
    ExperimentLog log;
    std::map<std::string, std::string> sections;
    std::vector<std::string> order;
    for (const auto& [key, value] : j.at("config").items()) {
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        throw Error(kModule, ErrorKind::kFormat, "bad config key " + key);
      }
      const std::string sec = key.substr(0, dot);
      if (!sections.count(sec)) order.push_back(sec);
      sections[sec] += key.substr(dot + 1) + " = " +
                       value.get<std::string>() + "\n";
    }
    std::string text;
    for (const auto& sec : order) text += "[" + sec + "]\n" + sections[sec];
    log.config = parse_config(text);

    log.schedule.total_fg_classes = j.at("total_fg_classes").get<int>();
    log.schedule.scenario = parse_scenario(j.at("scenario").get<std::string>());
    log.schedule.setting = j.at("setting").get<std::string>();
    for (const auto& c : j.at("schedule")) {
      log.schedule.steps.push_back(c.get<std::vector<ClassId>>());
    }
    if (log.config.strategy == Strategy::kJoint) {
      log.schedule.setting =
          std::to_string(log.schedule.total_fg_classes) + "-0";
    }
    log.step1_from_cache = j.value("step1_from_cache", false);
    for (const auto& s : j.at("steps")) {
      StepRecord rec;
      rec.step = s.at("step").get<int>();
      rec.observed = metrics_from_json(s.at("observed"));
      if (!s.at("probing").is_null()) {
        rec.probing = metrics_from_json(s.at("probing"));
      }
      rec.trainable_params = s.at("trainable_params").get<long>();
      rec.seconds = s.at("seconds").get<double>();
      log.steps.push_back(std::move(rec));
    }
    for (const auto& m : j.at("md")) {
      MdRecord r;
      const auto source = m.at("source").get<std::string>();
      r.source = source == "observed" ? MdSource::kObserved : MdSource::kProbing;
      r.t = m.at("t").get<int>();
      r.k = m.at("k").get<int>();
      r.value = m.at("value").get<double>();
      log.md.push_back(r);
    }
    return log;
  } catch (const json::exception& e) {
    throw Error(kModule, ErrorKind::kFormat,
                std::string("malformed experiment log: ") + e.what());
  }
}

ExperimentLog read_log(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(kModule, ErrorKind::kFormat,
                path.string() + ": " + e.what());
  }
  return log_from_json(j);
}

std::string curves_csv(const ExperimentLog& log) {
  std::ostringstream os;
  os << "step,miou_init,miou_incr,miou_all,probe_miou_all,probe_miou_init,"
        "probe_miou_incr,trainable_params,seconds\n";
  for (const auto& s : log.steps) {
    os << s.step << ',' << csv_num(s.observed.miou_init) << ','
       << csv_num(s.observed.miou_incr) << ',' << csv_num(s.observed.miou_all)
       << ',';
    if (s.probing) {
      os << csv_num(s.probing->miou_all) << ','
         << csv_num(s.probing->miou_init) << ','
         << csv_num(s.probing->miou_incr);
    } else {
      os << ",,";
    }
    os << ',' << s.trainable_params << ',' << csv_num(s.seconds) << '\n';
  }
  return os.str();
}

std::string md_csv(std::span<const MdRecord> records) {
  std::ostringstream os;
  os << "source,t,k,value\n";
  for (const auto& r : records) {
    os << to_string(r.source) << ',' << r.t << ',' << r.k << ','
       << csv_num(r.value) << '\n';
  }
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (header) {
      table.header = std::move(fields);
      header = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw Error(kModule, ErrorKind::kFormat,
                    "csv row has " + std::to_string(fields.size()) +
                        " fields, header has " +
                        std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error("io", ErrorKind::kIo, "short write to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_report_bundle(const ExperimentLog& log,
                         const std::filesystem::path& dir, bool charts) {
  std::filesystem::create_directories(dir);
  write_text(dir / "experiment.json", log_to_json(log).dump(2) + "\n");
  write_text(dir / "curves.csv", curves_csv(log));
  write_text(dir / "md.csv", md_csv(log.md));
  if (!charts) return;

  Series observed{"observed miou_all", {}};
  Series probing{"probing miou_all", {}};
  for (const auto& s : log.steps) {
    if (s.observed.miou_all) observed.points.emplace_back(s.step, *s.observed.miou_all);
    if (s.probing && s.probing->miou_all) {
      probing.points.emplace_back(s.step, *s.probing->miou_all);
    }
  }
  std::vector<Series> curves{observed};
  if (!probing.points.empty()) curves.push_back(probing);
  write_text(dir / "miou.svg",
             line_chart_svg(display_name(log) + ": step-wise mIoU", "step",
                            "mIoU (%)", curves));

  std::map<std::pair<int, int>, Series> md_series;
  for (const auto& r : log.md) {
    auto& s = md_series[{static_cast<int>(r.source), r.t}];
    s.name = std::string(to_string(r.source)) + " t=" + std::to_string(r.t);
    s.points.emplace_back(r.t + r.k, r.value);
  }
  std::vector<Series> md;
  for (auto& [key, s] : md_series) md.push_back(std::move(s));
  write_text(dir / "md.svg",
             line_chart_svg(display_name(log) + ": moving distance",
                            "measurement step t+k", "MD", md));
}

Comparison compare_logs(std::span<const ExperimentLog> logs) {
  if (logs.empty()) {
    throw Error(kModule, ErrorKind::kComparison, "no experiment logs given");
  }
  const ClassSchedule& ref = logs.front().schedule;
  for (const auto& log : logs) {
    if (log.schedule.steps != ref.steps ||
        log.schedule.total_fg_classes != ref.total_fg_classes) {
      throw Error(kModule, ErrorKind::kComparison,
                  "'" + display_name(log) + "' uses schedule " +
                      log.schedule.setting + ", expected " + ref.setting);
    }
  }
  std::ostringstream csv;
  csv << "experiment,step,miou_init,miou_incr,miou_all\n";
  std::vector<Series> series;
  for (const auto& log : logs) {
    Series s{display_name(log), {}};
    for (const auto& st : log.steps) {
      csv << sanitize(s.name) << ',' << st.step << ','
          << csv_num(st.observed.miou_init) << ','
          << csv_num(st.observed.miou_incr) << ','
          << csv_num(st.observed.miou_all) << '\n';
      if (st.observed.miou_all) {
        s.points.emplace_back(st.step, *st.observed.miou_all);
      }
    }
    series.push_back(std::move(s));
  }
  return {csv.str(), line_chart_svg("Step-wise comparison (mIoU over seen classes)",
                                    "step", "mIoU (%)", series)};
}

}  // namespace csslab
