#ifndef CSSLAB_REPORT_H_
#define CSSLAB_REPORT_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csslab/trainer.h"

namespace csslab {

inline constexpr int kLogSchemaVersion = 1;

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

// Schema documented in docs/experiment_log.md.
nlohmann::json log_to_json(const ExperimentLog& log);
ExperimentLog log_from_json(const nlohmann::json& j);
ExperimentLog read_log(const std::filesystem::path& path);

// step,miou_init,miou_incr,miou_all,probe_miou_all,probe_miou_init,
// probe_miou_incr,trainable_params,seconds (undefined values left empty).
std::string curves_csv(const ExperimentLog& log);
// source,t,k,value
std::string md_csv(std::span<const MdRecord> records);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

// experiment.json, curves.csv, md.csv and, when `charts`, miou.svg/md.svg.
void write_report_bundle(const ExperimentLog& log,
                         const std::filesystem::path& dir, bool charts = true);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Step-wise miou_all overlay. Throws a comparison error unless all logs share
// one schedule.
struct Comparison {
  std::string csv;  // experiment,step,miou_init,miou_incr,miou_all
  std::string svg;
};
Comparison compare_logs(std::span<const ExperimentLog> logs);

std::string display_name(const ExperimentLog& log);

}  // namespace csslab

#endif  // CSSLAB_REPORT_H_
