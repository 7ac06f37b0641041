// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: configuration, the hydrodynamic-limit and GFF
// experiments, and CSV / summary output.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradphi/dynamics.hpp"
#include "gradphi/stats.hpp"

namespace gradphi {

const char* version();

struct ExperimentConfig {
    static constexpr int kSchema = 1;
    int schema = kSchema;
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 1;
    int replicas = 1;
    std::string out_dir = "out";
    int threads = 0;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

std::vector<std::string> experiment_names();

// %.17g
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header = {});
    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct ExperimentOutput {
    std::string csv_name;
    CsvTable table;
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json checks = nlohmann::json::object();  // name -> bool

    bool ok() const;
};

// Throws ConfigError on malformed parameters.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Writes <out>/<csv_name> and <out>/summary.json.
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out, double wall_seconds);

struct HydroOptions {
    std::string datum = "sine_product";
    double noise_scale = 1.0;
    int threads = 1;
    int two_scale_max_N = 0;  // gradient-level two-scale error for N <= this
    std::size_t target_slices = 1024;
};

struct HydroRow {
    int N = 0;
    double eps = 0.0;
    double error_mean = 0.0, error_se = 0.0;
    double err_continuous = -1.0;  // vs the exact heat solution when available
    double two_scale_grad = -1.0;  // mean ||grad u - grad w|| when computed
};

struct HydroResult {
    std::vector<HydroRow> rows;
    FitResult fit;  // log(error / (1 + |log eps|^{1/2} 1_{d=2})) against log eps
    bool decreasing = false;

    nlohmann::json to_json() const;
};

HydroResult hydro_limit_experiment(const std::vector<int>& Ns, int d, const Potential& V, int replicas,
                                   const NoiseSource& src, const HydroOptions& opt = {});

// GFF dynamic from an exact GFF sample, observed at T = L^2/2.
struct GffStationarity {
    int d = 2, L = 4, replicas = 0;
    double dt = 0.0, T = 0.0;
    // Displacement covariance C(h) = E phi(x) phi(x+h), estimated per replica
    // by the spatial average; index h as torus sites.
    std::vector<double> cov, cov_se, cov_scheme, cov_continuous;
    double max_z = 0.0;  // max |cov - cov_scheme| / se
    // Per eigenvalue class: lambda, recovered rate after step correction.
    std::vector<double> lambda, rate, rate_se;
    double max_rate_rel = 0.0;

    nlohmann::json to_json() const;
};

GffStationarity gff_stationarity_experiment(int d, int L, int replicas, const NoiseSource& src, double dt,
                                            int threads = 1);

}  // namespace gradphi
