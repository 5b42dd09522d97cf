#pragma once

#include <filesystem>
#include <string>

#include "lrising/config.hpp"

namespace lrising::cli {

/// Conventional artifact names inside the output directory.
std::filesystem::path sample_path(const std::filesystem::path& dir, double temperature);
std::filesystem::path rbm_path(const std::filesystem::path& dir);
std::filesystem::path rbm_trace_path(const std::filesystem::path& dir);
std::filesystem::path thermometer_path(const std::filesystem::path& dir, int side);
std::filesystem::path thermometer_trace_path(const std::filesystem::path& dir, int side);
std::filesystem::path scaling_path(const std::filesystem::path& dir);
std::filesystem::path tc_report_path(const std::filesystem::path& dir);
std::filesystem::path flow_path(const std::filesystem::path& dir, double temperature);
std::filesystem::path rg_step_path(const std::filesystem::path& dir, int step);
std::filesystem::path stack_layer_path(const std::filesystem::path& dir, int layer);
std::filesystem::path vh_matrix_path(const std::filesystem::path& dir, const std::string& source,
                                     int layer);
std::filesystem::path vh_manifest_path(const std::filesystem::path& dir);

/// One command per experiment stage. Each validates its inputs, takes the
/// output-directory lock, and produces byte-identical files for identical
/// config. Missing upstream artifacts raise errors naming the command that
/// produces them.
void cmd_sample(const ExperimentConfig& config);
void cmd_scaling(const ExperimentConfig& config);
void cmd_rbm_train(const ExperimentConfig& config);
void cmd_thermo(const ExperimentConfig& config);
void cmd_flow(const ExperimentConfig& config);
void cmd_rg(const ExperimentConfig& config);
void cmd_stack(const ExperimentConfig& config);
void cmd_vh(const ExperimentConfig& config);

}  // namespace lrising::cli
