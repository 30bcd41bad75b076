// Copyright 2026 The allocsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "allocsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "allocsim/errors.hpp"

namespace allocsim {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int estimate_width(const Trajectory& trajectory) {
  int width = 0;
  for (const auto& row : trajectory.estimate_path)
    width = std::max(width, static_cast<int>(row.size()));
  return width;
}

}  // namespace

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  const int estimates = estimate_width(trajectory);
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "step,arm_or_stratum,pi";
  for (int e = 0; e < estimates; ++e) out << ",estimate_" << e;
  out << ",martingale\n";

  const auto emit = [&](long step, const std::string& label, double pi,
                        const std::vector<double>& estimate, double martingale) {
    out << step << ',' << label << ',';
    if (std::isnan(pi))
      out << "";
    else
      out << format_double(pi);
    for (int e = 0; e < estimates; ++e) {
      out << ',';
      if (e < static_cast<int>(estimate.size())) out << format_double(estimate[e]);
    }
    out << ',' << format_double(martingale) << "\n";
  };

  static const std::vector<double> kNoEstimate;
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const long step = trajectory.steps[i];
    const auto& estimate =
        i < trajectory.estimate_path.size() ? trajectory.estimate_path[i] : kNoEstimate;
    const double m = trajectory.martingale_path[i];
    for (std::size_t a = 0; a < trajectory.pi_path[i].size(); ++a)
      emit(step, std::to_string(a), trajectory.pi_path[i][a], estimate, m);
    if (i < trajectory.stratum_pi_path.size())
      for (std::size_t c = 0; c < trajectory.stratum_pi_path[i].size(); ++c)
        emit(step, trajectory.stratum_labels[c], trajectory.stratum_pi_path[i][c], estimate, m);
  }
}

nlohmann::ordered_json trajectory_json(const Trajectory& trajectory) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["horizon"] = trajectory.horizon;
  doc["arms"] = trajectory.arms;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  const auto estimate_or_null = [](const std::vector<double>& e) -> nlohmann::ordered_json {
    if (e.empty()) return nullptr;
    return e;
  };
  static const std::vector<double> kNoEstimate;
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto& estimate =
        i < trajectory.estimate_path.size() ? trajectory.estimate_path[i] : kNoEstimate;
    for (std::size_t a = 0; a < trajectory.pi_path[i].size(); ++a) {
      nlohmann::ordered_json row;
      row["step"] = trajectory.steps[i];
      row["arm_or_stratum"] = std::to_string(a);
      row["pi"] = trajectory.pi_path[i][a];
      row["estimate"] = estimate_or_null(estimate);
      row["martingale"] = trajectory.martingale_path[i];
      rows.push_back(std::move(row));
    }
    if (i < trajectory.stratum_pi_path.size()) {
      for (std::size_t c = 0; c < trajectory.stratum_pi_path[i].size(); ++c) {
        const double pi = trajectory.stratum_pi_path[i][c];
        nlohmann::ordered_json row;
        row["step"] = trajectory.steps[i];
        row["arm_or_stratum"] = trajectory.stratum_labels[c];
        row["pi"] = std::isnan(pi) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(pi);
        row["estimate"] = estimate_or_null(estimate);
        row["martingale"] = trajectory.martingale_path[i];
        rows.push_back(std::move(row));
      }
    }
  }
  doc["rows"] = std::move(rows);
  return doc;
}

nlohmann::ordered_json summary_json(const ReplicationSummary& summary,
                                    const ConvergenceReport* report,
                                    const nlohmann::ordered_json* resolved_spec) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["replications"] = summary.replications;
  doc["arms"] = summary.arms;
  doc["horizon"] = summary.horizon;
  doc["base_seed"] = summary.base_seed;
  doc["final_pi"] = summary.final_pi;
  if (!summary.final_stratum_pi.empty()) {
    doc["stratum_labels"] = summary.stratum_labels;
    // NaN (stratum never filled) serializes as null
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& rep : summary.final_stratum_pi) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (double v : rep)
        row.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
      cells.push_back(std::move(row));
    }
    doc["final_stratum_pi"] = std::move(cells);
    doc["final_margin_t"] = summary.final_margin_t;
    doc["final_margin_w"] = summary.final_margin_w;
  }
  doc["martingale_residuals"] = summary.martingale_residuals;

  if (report != nullptr) {
    nlohmann::ordered_json rep;
    rep["epsilon"] = report->epsilon;
    rep["limit"] = report->limit;
    rep["per_arm_mean_error"] = report->per_arm_mean_error;
    rep["mean_abs_error"] = report->mean_abs_error;
    rep["max_abs_error"] = report->max_abs_error;
    rep["fraction_within"] = report->fraction_within;
    if (!report->stratum_limit.empty()) {
      rep["stratum_limit"] = report->stratum_limit;
      rep["stratum_mean_abs_error"] = report->stratum_mean_abs_error;
      rep["stratum_fraction_within"] = report->stratum_fraction_within;
    }
    rep["mean_abs_martingale_residual"] = report->mean_abs_martingale_residual;
    doc["report"] = std::move(rep);
  }
  if (resolved_spec != nullptr) doc["spec"] = *resolved_spec;
  return doc;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError("cannot create directory " + path.parent_path().string());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

}  // namespace allocsim
