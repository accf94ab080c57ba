#include "csslab/config.h"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "csslab/errors.h"
#include "csslab/report.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "config";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Thrown by value parsers; the caller adds the line number.
struct BadValue {
  std::string what;
};

template <typename T>
T parse_number(std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"'" + std::string(v) + "' is not a valid number"};
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue{"'" + std::string(v) + "' is not a boolean"};
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
std::string fmt(bool v) { return v ? "true" : "false"; }
template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  using SV = std::string_view;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto u32 = [](std::uint32_t& dst, SV v) {
      dst = parse_number<std::uint32_t>(v);
    };
    auto i32 = [](int& dst, SV v) { dst = parse_number<int>(v); };
    auto f64 = [](double& dst, SV v) { dst = parse_number<double>(v); };

    // [experiment]
    k.push_back({"experiment", "name",
                 [](C& c, SV v) { c.name = std::string(v); },
                 [](const C& c) { return c.name; }});
    k.push_back({"experiment", "seed",
                 [](C& c, SV v) { c.seed = parse_number<std::uint64_t>(v); },
                 [](const C& c) { return fmt_int(c.seed); }});
    k.push_back({"experiment", "setting",
                 [](C& c, SV v) { c.setting = std::string(v); },
                 [](const C& c) { return c.setting; }});
    k.push_back({"experiment", "scenario",
                 [](C& c, SV v) {
                   try {
                     c.scenario = parse_scenario(v);
                   } catch (const Error& e) {
                     throw BadValue{e.detail()};
                   }
                 },
                 [](const C& c) { return std::string(to_string(c.scenario)); }});
    k.push_back({"experiment", "strategy",
                 [](C& c, SV v) {
                   try {
                     c.strategy = parse_strategy(v);
                   } catch (const Error& e) {
                     throw BadValue{e.detail()};
                   }
                 },
                 [](const C& c) { return std::string(to_string(c.strategy)); }});
    k.push_back({"experiment", "output_dir",
                 [](C& c, SV v) { c.output_dir = std::string(v); },
                 [](const C& c) { return c.output_dir.string(); }});
    k.push_back({"experiment", "cache_dir",
                 [](C& c, SV v) { c.cache_dir = std::string(v); },
                 [](const C& c) { return c.cache_dir.string(); }});
    k.push_back({"experiment", "probing",
                 [](C& c, SV v) { c.probing = parse_bool(v); },
                 [](const C& c) { return fmt(c.probing); }});
    k.push_back({"experiment", "md",
                 [](C& c, SV v) { c.md = parse_bool(v); },
                 [](const C& c) { return fmt(c.md); }});
    k.push_back({"experiment", "md_weights",
                 [](C& c, SV v) {
                   if (v == "current") c.md_weights = MdWeights::kCurrent;
                   else if (v == "frozen") c.md_weights = MdWeights::kFrozenAtT;
                   else throw BadValue{"md_weights must be current|frozen"};
                 },
                 [](const C& c) {
                   return std::string(c.md_weights == MdWeights::kCurrent
                                          ? "current"
                                          : "frozen");
                 }});
    k.push_back({"experiment", "md_prototypes",
                 [](C& c, SV v) {
                   if (v == "eval") c.md_train_prototypes = false;
                   else if (v == "train") c.md_train_prototypes = true;
                   else throw BadValue{"md_prototypes must be eval|train"};
                 },
                 [](const C& c) {
                   return std::string(c.md_train_prototypes ? "train" : "eval");
                 }});
    k.push_back({"experiment", "reserve_rows",
                 [=](C& c, SV v) {
                   i32(c.reserve_rows, v);
                   if (c.reserve_rows < 0) throw BadValue{"must be >= 0"};
                 },
                 [](const C& c) { return fmt_int(c.reserve_rows); }});

    // [model]
    k.push_back({"model", "hidden_dim",
                 [=](C& c, SV v) { u32(c.dims.hidden_dim, v); },
                 [](const C& c) { return fmt_int(c.dims.hidden_dim); }});
    k.push_back({"model", "embed_dim",
                 [=](C& c, SV v) { u32(c.dims.embed_dim, v); },
                 [](const C& c) { return fmt_int(c.dims.embed_dim); }});
    k.push_back({"model", "local_context",
                 [](C& c, SV v) { c.dims.local_context = parse_bool(v); },
                 [](const C& c) { return fmt(c.dims.local_context); }});

    // [optim]
    k.push_back({"optim", "lr0", [=](C& c, SV v) { f64(c.hyper.lr0, v); },
                 [](const C& c) { return fmt(c.hyper.lr0); }});
    k.push_back({"optim", "momentum",
                 [=](C& c, SV v) { f64(c.hyper.momentum, v); },
                 [](const C& c) { return fmt(c.hyper.momentum); }});
    k.push_back({"optim", "weight_decay",
                 [=](C& c, SV v) { f64(c.hyper.weight_decay, v); },
                 [](const C& c) { return fmt(c.hyper.weight_decay); }});
    k.push_back({"optim", "poly_power",
                 [=](C& c, SV v) { f64(c.hyper.poly_power, v); },
                 [](const C& c) { return fmt(c.hyper.poly_power); }});
    k.push_back({"optim", "poly_target",
                 [](C& c, SV v) {
                   if (v == "lr") c.hyper.poly_target = PolyTarget::kLearningRate;
                   else if (v == "weight_decay")
                     c.hyper.poly_target = PolyTarget::kWeightDecay;
                   else throw BadValue{"poly_target must be lr|weight_decay"};
                 },
                 [](const C& c) {
                   return std::string(c.hyper.poly_target ==
                                              PolyTarget::kLearningRate
                                          ? "lr"
                                          : "weight_decay");
                 }});
    k.push_back({"optim", "epochs_per_step",
                 [=](C& c, SV v) { i32(c.hyper.epochs_per_step, v); },
                 [](const C& c) { return fmt_int(c.hyper.epochs_per_step); }});
    k.push_back({"optim", "batch_size",
                 [=](C& c, SV v) { i32(c.hyper.batch_size, v); },
                 [](const C& c) { return fmt_int(c.hyper.batch_size); }});

    // [data]
    k.push_back({"data", "source",
                 [](C& c, SV v) {
                   if (v == "synth") c.use_synth = true;
                   else if (v == "files") c.use_synth = false;
                   else throw BadValue{"source must be synth|files"};
                 },
                 [](const C& c) {
                   return std::string(c.use_synth ? "synth" : "files");
                 }});
    k.push_back({"data", "train_path",
                 [](C& c, SV v) { c.train_path = std::string(v); },
                 [](const C& c) { return c.train_path.string(); }});
    k.push_back({"data", "eval_path",
                 [](C& c, SV v) { c.eval_path = std::string(v); },
                 [](const C& c) { return c.eval_path.string(); }});
    auto synth_u32 = [&](const char* name,
                         std::uint32_t SynthParams::*member) {
      k.push_back({"data", name,
                   [=](C& c, SV v) { u32(c.synth.*member, v); },
                   [=](const C& c) { return fmt_int(c.synth.*member); }});
    };
    synth_u32("classes", &SynthParams::num_classes);
    synth_u32("feat_dim", &SynthParams::feat_dim);
    synth_u32("height", &SynthParams::height);
    synth_u32("width", &SynthParams::width);
    synth_u32("images_per_class", &SynthParams::images_per_class);
    synth_u32("eval_images_per_class", &SynthParams::eval_images_per_class);
    synth_u32("objects_min", &SynthParams::objects_min);
    synth_u32("objects_max", &SynthParams::objects_max);
    synth_u32("object_min_side", &SynthParams::object_min_side);
    synth_u32("object_max_side", &SynthParams::object_max_side);
    synth_u32("mixing_depth", &SynthParams::mixing_depth);
    k.push_back({"data", "noise_sigma",
                 [=](C& c, SV v) { f64(c.synth.noise_sigma, v); },
                 [](const C& c) { return fmt(c.synth.noise_sigma); }});
    k.push_back({"data", "mixing_gain",
                 [=](C& c, SV v) { f64(c.synth.mixing_gain, v); },
                 [](const C& c) { return fmt(c.synth.mixing_gain); }});
    k.push_back({"data", "data_seed",
                 [](C& c, SV v) { c.synth.seed = parse_number<std::uint64_t>(v); },
                 [](const C& c) { return fmt_int(c.synth.seed); }});
    return k;
  }();
  return table;
}

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw Error(kModule, ErrorKind::kConfig,
              "line " + std::to_string(line) + ": " + what);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::string section = "experiment";
  std::map<std::string, int> seen;
  bool data_seed_set = false;
  bool source_set = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_at(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "experiment" && section != "model" &&
          section != "optim" && section != "data") {
        fail_at(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(line_no, "expected key = value");
    const std::string name(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const Key* key = nullptr;
    for (const auto& k : keys()) {
      if (k.name == name) key = &k;
    }
    if (key == nullptr) fail_at(line_no, "unknown key '" + name + "'");
    if (key->section != section) {
      fail_at(line_no, "key '" + name + "' belongs in [" + key->section +
                           "], found in [" + section + "]");
    }
    if (auto it = seen.find(name); it != seen.end()) {
      fail_at(line_no, "duplicate key '" + name + "' (first on line " +
                           std::to_string(it->second) + ")");
    }
    seen[name] = line_no;
    try {
      key->set(config, value);
    } catch (const BadValue& bad) {
      fail_at(line_no, name + ": " + bad.what);
    }
    data_seed_set |= name == "data_seed";
    source_set |= name == "source";
  }
  if (!data_seed_set) config.synth.seed = config.seed;
  if (!source_set && (!config.train_path.empty() || !config.eval_path.empty())) {
    config.use_synth = false;
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  ExperimentConfig config = parse_config(text);
  // Relative data/output paths resolve against the config file.
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(config.train_path);
  resolve(config.eval_path);
  resolve(config.output_dir);
  resolve(config.cache_dir);
  return config;
}

ConfigEntries config_entries(const ExperimentConfig& config) {
  ConfigEntries out;
  for (const auto& k : keys()) {
    out.emplace_back(k.section + "." + k.name, k.get(config));
  }
  return out;
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << k.name << " = " << k.get(config) << '\n';
  }
  return os.str();
}

}  // namespace csslab
