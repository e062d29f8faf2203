#pragma once

#include "spiked/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace spiked {

// Experiment kinds: spectrum_compare, alignment_sweep, phase_diagram,
// snr_roundtrip, unfolding_compare, rank_r.
struct ExperimentConfig {
    std::string kind = "alignment_sweep";
    Dims dims{50, 50, 50};
    std::vector<double> beta_grid{2.0};
    std::size_t trials = 1;
    std::uint64_t base_seed = 1;  // trial k uses seed base_seed + k
    std::string strategy = "planted";
    std::size_t bins = 100;
    std::string output_dir;

    bool dependent = false;          // spectrum_compare: vectors from power iteration
    std::vector<int> orders;         // phase_diagram (default 3..12)
    std::vector<double> betas;       // rank_r spike strengths
    std::size_t mode = 0;            // unfolding_compare
    bool beta_relative = false;      // unfolding_compare: grid in units of the unfolding threshold
    double tol = 1e-10;
    int max_sweeps = 1000;
    unsigned threads = 0;            // 0: hardware concurrency
    bool svg = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    // Keys present in j override the values in base.
    static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
    nlohmann::json to_json() const;
    void validate() const;
};

// Rows of pre-formatted cells; numbers go through fmt_num.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    std::size_t col(const std::string& name) const;
    double num(std::size_t row, const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
    std::string csv() const;
};

struct ExperimentResult {
    ExperimentConfig config;
    Table records;
    Table summary;
    std::map<std::string, Table> measures;  // file stem -> table
    nlohmann::json scalars = nlohmann::json::object();
    std::size_t failures = 0;
    double wall_seconds = 0.0;
};

ExperimentResult run_spectrum_compare(const ExperimentConfig& cfg);
ExperimentResult run_alignment_sweep(const ExperimentConfig& cfg);
ExperimentResult run_phase_diagram(const ExperimentConfig& cfg);
ExperimentResult run_snr_roundtrip(const ExperimentConfig& cfg);
ExperimentResult run_unfolding_compare(const ExperimentConfig& cfg);
ExperimentResult run_rank_r(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// config.json, records.csv, summary.csv, measure_*.csv, summary.json when
// scalars exist, timing.json, and *.svg when cfg.svg is set.
void write_result(const ExperimentResult& r, const std::string& dir);

// Runs body(0..n-1) on a bounded pool; exceptions are rethrown after join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace spiked
