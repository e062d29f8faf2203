#include "spiked/harness.hpp"
#include "spiked/asymptotics.hpp"
#include "spiked/block_matrix.hpp"
#include "spiked/estimation.hpp"
#include "spiked/io.hpp"
#include "spiked/rng.hpp"
#include "spiked/spectral.hpp"
#include "spiked/svg.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace spiked {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kKinds{"spectrum_compare", "alignment_sweep", "phase_diagram",
                                   "snr_roundtrip",    "unfolding_compare", "rank_r"};

std::string num(double x) { return fmt_num(x); }
std::string num(std::size_t x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }

std::string dims_str(const Dims& dims) {
    std::string s;
    for (std::size_t k = 0; k < dims.size(); ++k) s += (k ? "x" : "") + std::to_string(dims[k]);
    return s;
}

struct Stats {
    double mean = kNaN;
    double sd = kNaN;
    std::size_t n = 0;
};

// NaN entries are skipped; sd is the n - 1 form (0 for a single value).
Stats stats(const std::vector<double>& xs) {
    Stats s;
    double sum = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) sum += x, ++s.n;
    if (s.n == 0) return s;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) ss += (x - s.mean) * (x - s.mean);
    s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    return s;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t trial) { return cfg.base_seed + trial; }

// Noise realization for grid point bi of a trial; annealed runs reuse one
// realization across the whole grid instead.
std::uint64_t noise_seed(std::uint64_t seed, std::size_t bi) { return stream_key(seed, 0x100000 + bi); }

PowerOptions power_opts(const ExperimentConfig& cfg) {
    PowerOptions o;
    o.tol = cfg.tol;
    o.max_sweeps = cfg.max_sweeps;
    return o;
}

InitStrategy make_init(const ExperimentConfig& cfg, const std::vector<Vec>& truth, std::uint64_t seed) {
    if (cfg.strategy == "planted") return InitStrategy::planted_at(truth);
    return InitStrategy::random(seed);
}

LimitingMeasure law_for(const Dims& dims) {
    if (dims.size() == 2)
        return LimitingMeasure::matrix(static_cast<double>(dims[0]) / static_cast<double>(dims[0] + dims[1]));
    return LimitingMeasure::for_ratios(RatioVector::from_dims(dims));
}

// Theory for a rank-one spike of strength beta; matrices go through the
// closed form with x on the first mode.
struct Theory {
    double lambda = kNaN;
    std::vector<double> align;
    double beta_s = kNaN;
    bool above = false;
};

Theory theory_for(double beta, const Dims& dims) {
    Theory th;
    if (dims.size() == 2) {
        const auto mp = predict_matrix(beta, static_cast<double>(dims[0]) / static_cast<double>(dims_sum(dims)));
        th.lambda = mp.lambda_inf;
        th.align = {mp.align_x, mp.align_y};
        th.beta_s = mp.beta_s;
        th.above = mp.above_threshold;
        return th;
    }
    const auto p = predict(beta, RatioVector::from_dims(dims));
    th.lambda = p.lambda_inf;
    th.align = p.alignments;
    th.beta_s = p.beta_s;
    th.above = p.above_threshold;
    return th;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<std::string> indexed(const std::string& stem, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 1; k <= n; ++k) out.push_back(stem + std::to_string(k));
    return out;
}

double abs_dot(const Vec& a, const Vec& b) { return std::abs(a.dot(b)); }

// Kronecker product in row-major order (last factor fastest), matching the
// column order of an unfolding.
Vec kron(const std::vector<Vec>& vs) {
    Vec out = Vec::Ones(1);
    for (const auto& v : vs) {
        Vec next(out.size() * v.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * v.size(), v.size()) = out[i] * v;
        out = std::move(next);
    }
    return out;
}

}  // namespace

// ---- config ----------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) { return from_json(j, ExperimentConfig{}); }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, ExperimentConfig c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::set<std::string> known{"kind",  "dims",      "beta_grid",     "trials", "base_seed",
                                             "strategy", "bins",   "output_dir",    "dependent", "orders",
                                             "betas", "mode",      "beta_relative", "tol",    "max_sweeps",
                                             "threads", "svg"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw std::invalid_argument("unknown config key: " + it.key());
    try {
        if (j.contains("kind")) c.kind = j.at("kind").get<std::string>();
        if (j.contains("dims")) c.dims = j.at("dims").get<Dims>();
        if (j.contains("beta_grid")) c.beta_grid = j.at("beta_grid").get<std::vector<double>>();
        if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
        if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
        if (j.contains("strategy")) c.strategy = j.at("strategy").get<std::string>();
        if (j.contains("bins")) c.bins = j.at("bins").get<std::size_t>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("dependent")) c.dependent = j.at("dependent").get<bool>();
        if (j.contains("orders")) c.orders = j.at("orders").get<std::vector<int>>();
        if (j.contains("betas")) c.betas = j.at("betas").get<std::vector<double>>();
        if (j.contains("mode")) c.mode = j.at("mode").get<std::size_t>();
        if (j.contains("beta_relative")) c.beta_relative = j.at("beta_relative").get<bool>();
        if (j.contains("tol")) c.tol = j.at("tol").get<double>();
        if (j.contains("max_sweeps")) c.max_sweeps = j.at("max_sweeps").get<int>();
        if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
        if (j.contains("svg")) c.svg = j.at("svg").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["dims"] = dims;
    j["beta_grid"] = beta_grid;
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    j["strategy"] = strategy;
    j["bins"] = bins;
    j["output_dir"] = output_dir;
    j["dependent"] = dependent;
    j["orders"] = orders;
    j["betas"] = betas;
    j["mode"] = mode;
    j["beta_relative"] = beta_relative;
    j["tol"] = tol;
    j["max_sweeps"] = max_sweeps;
    j["threads"] = threads;
    j["svg"] = svg;
    return j;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (!kKinds.count(kind)) fail("unknown experiment kind: " + kind);
    if (trials == 0) fail("trials must be at least 1");
    if (bins == 0) fail("bins must be at least 1");
    if (!(tol > 0.0)) fail("tol must be positive");
    if (max_sweeps < 1) fail("max_sweeps must be at least 1");
    if (strategy != "random" && strategy != "planted" && strategy != "annealed") fail("unknown strategy: " + strategy);
    if (strategy == "annealed" && kind != "alignment_sweep") fail("annealed strategy only applies to alignment_sweep");
    if (kind == "phase_diagram") {
        for (int d : orders)
            if (d < 3) fail("phase diagram orders must be >= 3");
        return;
    }
    if (dims.size() < 2) fail("dims needs at least two modes");
    for (auto n : dims)
        if (n == 0) fail("dims must be positive");
    const bool tensor_only = kind == "snr_roundtrip" || kind == "unfolding_compare" || kind == "rank_r";
    if (tensor_only && dims.size() < 3) fail(kind + " needs an order >= 3 tensor");
    if (kind == "rank_r") {
        if (betas.empty()) fail("rank_r needs betas");
        for (double b : betas)
            if (!(b > 0.0) || !std::isfinite(b)) fail("rank_r betas must be positive");
        for (auto n : dims)
            if (n < betas.size()) fail("rank exceeds a mode dimension");
        return;
    }
    if (beta_grid.empty()) fail("beta_grid must not be empty");
    for (double b : beta_grid)
        if (!(b >= 0.0) || !std::isfinite(b)) fail("beta_grid entries must be finite and >= 0");
    if (kind == "unfolding_compare" && mode >= dims.size()) fail("mode out of range");
    if (strategy == "annealed") {
        if (dims.size() < 3) fail("annealed strategy needs an order >= 3 tensor");
        std::set<double> uniq(beta_grid.begin(), beta_grid.end());
        if (uniq.size() != beta_grid.size()) fail("annealed beta_grid must not repeat values");
    }
}

// ---- table -----------------------------------------------------------------

void Table::add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw std::logic_error("row width does not match header");
    rows.push_back(std::move(row));
}

std::size_t Table::col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

double Table::num(std::size_t row, const std::string& name) const {
    const std::string& s = rows.at(row).at(col(name));
    if (s == "nan" || s.empty()) return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not a number: " + s);
    return x;
}

std::vector<double> Table::column(const std::string& name) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(num(r, name));
    return out;
}

std::string Table::csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

// ---- pool ------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// ---- experiments -----------------------------------------------------------

ExperimentResult run_spectrum_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const auto d = cfg.dims.size();
    const LimitingMeasure law = law_for(cfg.dims);
    const std::size_t nb = cfg.beta_grid.size();

    struct Item {
        std::vector<std::string> row;
        double ks = kNaN, gap = kNaN, top = kNaN;
        bool ok = true;
        Table measure;
    };
    std::vector<Item> items(nb * cfg.trials);
    parallel_for(items.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t bi = idx / cfg.trials, trial = idx % cfg.trials;
        const double beta = cfg.beta_grid[bi];
        const auto seed = trial_seed(cfg, trial);
        const auto model = SpikeModel::random(beta, cfg.dims, seed);
        const DenseTensor t = build_spiked_tensor(model, noise_seed(seed, bi));
        Item& it = items[idx];

        std::vector<Vec> vs;
        double lambda = kNaN;
        int iters = 0;
        if (cfg.dependent) {
            const auto init = beta > 0.0 ? make_init(cfg, as_vecs(model.components), seed) : InitStrategy::random(seed);
            const auto tup = power_iteration(t, init, power_opts(cfg));
            vs = tup.vectors;
            lambda = tup.lambda;
            iters = tup.iterations;
            it.ok = tup.converged;
        } else {
            for (std::size_t k = 0; k < d; ++k)
                vs.push_back(UnitVector::random(cfg.dims[k], seed, streams::probe_base + k).vec());
        }
        const BlockMatrix pm = phi(t, vs);
        const Spectrum sp = eig_sym(pm, false);
        it.top = sp.eigenvalues[sp.eigenvalues.size() - 1];
        const double expected = cfg.dependent ? static_cast<double>(pm.d - 1) * lambda : kNaN;
        it.gap = cfg.dependent ? it.top - expected : kNaN;
        if (it.ok) it.ks = ks_distance(sp, law);
        it.row = {num(beta),  num(trial), std::to_string(seed), num(it.ks),        num(it.top),
                  num(lambda), num(expected), num(it.gap),  num(iters), it.ok ? "1" : "0"};

        if (trial == 0) {
            const auto em = empirical_measure(sp, cfg.bins);
            it.measure.header = {"bin_left", "bin_right", "density", "theory_density"};
            for (std::size_t b = 0; b < em.densities.size(); ++b) {
                const double mid = 0.5 * (em.bin_edges[b] + em.bin_edges[b + 1]);
                it.measure.add({num(em.bin_edges[b]), num(em.bin_edges[b + 1]), num(em.densities[b]), num(law.density(mid))});
            }
        }
    });

    res.records.header = {"beta", "trial", "seed", "ks", "top_eigenvalue", "lambda_hat",
                          "expected_top", "top_gap", "iterations", "converged"};
    res.summary.header = {"beta", "trials", "failures", "ks_mean", "ks_sd", "ks_max",
                          "top_eigenvalue_mean", "max_abs_top_gap", "theory_edge", "theory_atom"};
    for (std::size_t bi = 0; bi < nb; ++bi) {
        std::vector<double> ks, tops;
        double max_gap = cfg.dependent ? 0.0 : kNaN;
        std::size_t fails = 0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            auto& it = items[bi * cfg.trials + trial];
            res.records.add(it.row);
            if (!it.ok) {
                ++fails;
                continue;
            }
            ks.push_back(it.ks);
            tops.push_back(it.top);
            if (cfg.dependent) max_gap = std::max(max_gap, std::abs(it.gap));
            if (trial == 0) res.measures["measure_b" + std::to_string(bi)] = std::move(it.measure);
        }
        res.failures += fails;
        const auto s = stats(ks);
        const double ks_max = ks.empty() ? kNaN : *std::max_element(ks.begin(), ks.end());
        res.summary.add({num(cfg.beta_grid[bi]), num(cfg.trials), num(fails), num(s.mean), num(s.sd), num(ks_max),
                         num(stats(tops).mean), num(max_gap), num(law.right_edge()), num(law.atom_at_zero())});
    }
    res.scalars["dims"] = dims_str(cfg.dims);
    res.scalars["theory_edge"] = law.right_edge();
    return res;
}

ExperimentResult run_alignment_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const auto d = cfg.dims.size();
    const std::size_t nb = cfg.beta_grid.size();
    const bool matrix = d == 2;
    const bool annealed = cfg.strategy == "annealed";

    struct Cell {
        double lambda = kNaN;
        std::vector<double> align;
        int iters = 0;
        bool ok = true;
    };
    std::vector<Cell> cells(nb * cfg.trials);

    // Annealing visits the grid from the top; a warm-up point at three times
    // the threshold is prepended when the grid starts below it.
    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.beta_grid[a] > cfg.beta_grid[b]; });
    std::vector<double> anneal_grid;
    bool warmup = false;
    if (annealed) {
        const double bs = compute_beta_s(RatioVector::from_dims(cfg.dims));
        if (3.0 * bs > cfg.beta_grid[order[0]]) {
            anneal_grid.push_back(3.0 * bs);
            warmup = true;
        }
        for (auto k : order) anneal_grid.push_back(cfg.beta_grid[k]);
    }

    parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
        const auto seed = trial_seed(cfg, trial);
        const auto base = SpikeModel::random(0.0, cfg.dims, seed);
        const auto truth = as_vecs(base.components);
        auto record = [&](std::size_t bi, const std::vector<Vec>& vs, double lambda, int iters, bool ok) {
            Cell& c = cells[bi * cfg.trials + trial];
            c.lambda = lambda;
            c.iters = iters;
            c.ok = ok;
            for (std::size_t k = 0; k < d; ++k) c.align.push_back(abs_dot(vs[k], truth[k]));
        };
        if (annealed) {
            const DenseTensor noise = sample_gaussian_tensor(cfg.dims, seed);
            TensorBuilder build = [&](double beta) {
                SpikeModel m = base;
                m.beta = beta;
                return build_spiked_tensor(m, noise);
            };
            const auto tuples = annealed_power_iteration(build, anneal_grid, seed, power_opts(cfg));
            for (std::size_t k = 0; k < nb; ++k) {
                const auto& tup = tuples[k + (warmup ? 1 : 0)];
                record(order[k], tup.vectors, tup.lambda, tup.iterations, tup.converged);
            }
            return;
        }
        for (std::size_t bi = 0; bi < nb; ++bi) {
            SpikeModel m = base;
            m.beta = cfg.beta_grid[bi];
            const DenseTensor t = build_spiked_tensor(m, noise_seed(seed, bi));
            if (matrix) {
                const Mat mm = unfold(t, 0);
                const auto sv = top_singular(mm);
                record(bi, {sv.left, sv.right}, sv.sigma, 0, true);
            } else {
                const auto tup = power_iteration(t, make_init(cfg, truth, seed), power_opts(cfg));
                record(bi, tup.vectors, tup.lambda, tup.iterations, tup.converged);
            }
        }
    });

    const std::string strat = matrix ? "svd" : cfg.strategy;
    res.records.header = concat({"seed", "trial", "beta", "dims", "lambda_hat"}, indexed("align_", d));
    res.records.header.insert(res.records.header.end(), {"iterations", "converged", "strategy"});
    res.summary.header = {"beta", "trials", "failures", "lambda_mean", "lambda_sd"};
    for (std::size_t k = 1; k <= d; ++k) {
        res.summary.header.push_back("align_" + std::to_string(k) + "_mean");
        res.summary.header.push_back("align_" + std::to_string(k) + "_sd");
    }
    res.summary.header = concat(res.summary.header, concat({"theory_lambda"}, indexed("theory_align_", d)));
    res.summary.header.insert(res.summary.header.end(), {"theory_beta_s", "above_threshold"});

    for (std::size_t bi = 0; bi < nb; ++bi) {
        const double beta = cfg.beta_grid[bi];
        std::vector<double> lam;
        std::vector<std::vector<double>> al(d);
        std::size_t fails = 0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const Cell& c = cells[bi * cfg.trials + trial];
            std::vector<std::string> row{std::to_string(trial_seed(cfg, trial)), num(trial), num(beta), dims_str(cfg.dims),
                                         num(c.lambda)};
            for (double a : c.align) row.push_back(num(a));
            row.insert(row.end(), {num(c.iters), c.ok ? "1" : "0", strat});
            res.records.add(std::move(row));
            if (!c.ok) {
                ++fails;
                continue;
            }
            lam.push_back(c.lambda);
            for (std::size_t k = 0; k < d; ++k) al[k].push_back(c.align[k]);
        }
        res.failures += fails;
        const Theory th = theory_for(beta, cfg.dims);
        const auto ls = stats(lam);
        std::vector<std::string> row{num(beta), num(cfg.trials), num(fails), num(ls.mean), num(ls.sd)};
        for (std::size_t k = 0; k < d; ++k) {
            const auto s = stats(al[k]);
            row.push_back(num(s.mean));
            row.push_back(num(s.sd));
        }
        row.push_back(num(th.lambda));
        for (double a : th.align) row.push_back(num(a));
        row.push_back(num(th.beta_s));
        row.push_back(th.above ? "1" : "0");
        res.summary.add(std::move(row));
    }
    res.scalars["beta_s"] = theory_for(0.0, cfg.dims).beta_s;
    res.scalars["dims"] = dims_str(cfg.dims);
    return res;
}

ExperimentResult run_phase_diagram(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    std::vector<int> orders = cfg.orders;
    if (orders.empty())
        for (int d = 3; d <= 12; ++d) orders.push_back(d);
    res.summary.header = {"order", "beta_s", "beta_s_numeric", "alignment_at_threshold", "right_edge", "lambda_at_threshold"};
    for (int d : orders) {
        const auto hc = hypercubic_beta_s(d);
        const auto rep = threshold_report(RatioVector::uniform(static_cast<std::size_t>(d)));
        res.summary.add({num(d), num(hc.beta_s), num(rep.beta_s), num(hc.alignment), num(rep.right_edge), num(rep.fold_lambda)});
    }
    res.records = res.summary;
    return res;
}

ExperimentResult run_snr_roundtrip(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const RatioVector c = RatioVector::from_dims(cfg.dims);
    const std::size_t nb = cfg.beta_grid.size();

    struct Cell {
        double lambda = kNaN, beta_hat = kNaN;
        bool below = false, ok = true;
        int iters = 0;
    };
    std::vector<Cell> cells(nb * cfg.trials);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t bi = idx / cfg.trials, trial = idx % cfg.trials;
        const auto seed = trial_seed(cfg, trial);
        const auto model = SpikeModel::random(cfg.beta_grid[bi], cfg.dims, seed);
        const DenseTensor t = build_spiked_tensor(model, noise_seed(seed, bi));
        const auto init = model.beta > 0.0 ? make_init(cfg, as_vecs(model.components), seed) : InitStrategy::random(seed);
        const auto tup = power_iteration(t, init, power_opts(cfg));
        Cell& cell = cells[idx];
        cell.lambda = tup.lambda;
        cell.iters = tup.iterations;
        cell.ok = tup.converged;
        try {
            cell.beta_hat = estimate_snr_from_lambda(tup.lambda, c);
        } catch (const BelowEdgeError&) {
            cell.below = true;
        }
    });

    res.records.header = {"beta", "trial", "seed", "lambda_hat", "beta_hat", "below_edge", "iterations", "converged"};
    res.summary.header = {"beta", "trials", "failures", "lambda_mean", "beta_hat_mean", "beta_hat_sd",
                          "below_edge_fraction", "theory_lambda", "theory_beta_hat", "theory_beta_s"};
    for (std::size_t bi = 0; bi < nb; ++bi) {
        const double beta = cfg.beta_grid[bi];
        std::vector<double> lam, bh;
        std::size_t fails = 0, below = 0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const Cell& cell = cells[bi * cfg.trials + trial];
            res.records.add({num(beta), num(trial), std::to_string(trial_seed(cfg, trial)), num(cell.lambda), num(cell.beta_hat),
                             cell.below ? "1" : "0", num(cell.iters), cell.ok ? "1" : "0"});
            if (!cell.ok) {
                ++fails;
                continue;
            }
            lam.push_back(cell.lambda);
            bh.push_back(cell.beta_hat);
            below += cell.below;
        }
        res.failures += fails;
        const auto p = predict(beta, c);
        double th_hat = kNaN;
        if (p.above_threshold) th_hat = estimate_snr_from_lambda(p.lambda_inf, c);
        const auto kept = cfg.trials - fails;
        const auto bs = stats(bh);
        res.summary.add({num(beta), num(cfg.trials), num(fails), num(stats(lam).mean), num(bs.mean), num(bs.sd),
                         num(kept ? static_cast<double>(below) / static_cast<double>(kept) : kNaN),
                         num(p.above_threshold ? p.lambda_inf : kNaN), num(th_hat), num(p.beta_s)});
    }
    return res;
}

ExperimentResult run_unfolding_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const std::size_t nb = cfg.beta_grid.size();
    const double threshold = unfolding_threshold(cfg.dims);
    std::vector<double> betas = cfg.beta_grid;
    if (cfg.beta_relative)
        for (auto& b : betas) b *= threshold;

    struct Cell {
        double sigma = kNaN, align_mode = kNaN, align_rest = kNaN;
    };
    std::vector<Cell> cells(nb * cfg.trials);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t bi = idx / cfg.trials, trial = idx % cfg.trials;
        const auto seed = trial_seed(cfg, trial);
        const auto model = SpikeModel::random(betas[bi], cfg.dims, seed);
        const DenseTensor t = build_spiked_tensor(model, noise_seed(seed, bi));
        const auto sv = top_singular(unfold(t, cfg.mode));
        std::vector<Vec> rest;
        for (std::size_t k = 0; k < cfg.dims.size(); ++k)
            if (k != cfg.mode) rest.push_back(model.components[k].vec());
        cells[idx] = {sv.sigma, abs_dot(sv.left, model.components[cfg.mode].vec()), abs_dot(sv.right, kron(rest))};
    });

    res.records.header = {"beta", "trial", "seed", "sigma_hat", "align_mode", "align_rest"};
    res.summary.header = {"beta", "beta_over_threshold", "trials", "sigma_mean", "align_mode_mean", "align_mode_sd",
                          "align_rest_mean", "theory_sigma", "theory_align_mode", "theory_align_rest"};
    std::vector<std::pair<double, double>> curve;
    for (std::size_t bi = 0; bi < nb; ++bi) {
        std::vector<double> sg, am, ar;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const Cell& c = cells[bi * cfg.trials + trial];
            res.records.add({num(betas[bi]), num(trial), std::to_string(trial_seed(cfg, trial)), num(c.sigma), num(c.align_mode),
                             num(c.align_rest)});
            sg.push_back(c.sigma);
            am.push_back(c.align_mode);
            ar.push_back(c.align_rest);
        }
        const auto mp = predict_unfolding(betas[bi], cfg.dims, cfg.mode);
        const auto ams = stats(am);
        curve.emplace_back(betas[bi], ams.mean);
        res.summary.add({num(betas[bi]), num(betas[bi] / threshold), num(cfg.trials), num(stats(sg).mean), num(ams.mean),
                         num(ams.sd), num(stats(ar).mean), num(mp.lambda_inf), num(mp.align_x), num(mp.align_y)});
    }

    // Transition: first upward crossing of 0.5 by the mean mode alignment,
    // linearly interpolated in beta.
    std::sort(curve.begin(), curve.end());
    double transition = kNaN;
    for (std::size_t k = 1; k < curve.size(); ++k) {
        const auto [b0, a0] = curve[k - 1];
        const auto [b1, a1] = curve[k];
        if (a0 < 0.5 && a1 >= 0.5) {
            transition = b0 + (0.5 - a0) / (a1 - a0) * (b1 - b0);
            break;
        }
    }
    res.scalars["threshold"] = threshold;
    res.scalars["transition_beta"] = std::isfinite(transition) ? nlohmann::json(transition) : nlohmann::json(nullptr);
    res.scalars["transition_ratio"] =
        std::isfinite(transition) ? nlohmann::json(transition / threshold) : nlohmann::json(nullptr);
    return res;
}

ExperimentResult run_rank_r(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const auto d = cfg.dims.size();
    std::vector<double> betas = cfg.betas;
    std::sort(betas.begin(), betas.end(), std::greater<>());
    const auto r = betas.size();

    struct Cell {
        double lambda = kNaN, cross = kNaN;
        std::vector<double> align;
        int iters = 0;
        bool ok = true;
    };
    std::vector<Cell> cells(r * cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
        const auto seed = trial_seed(cfg, trial);
        const auto spikes = sample_orthogonal_spikes(cfg.dims, betas, seed);
        const DenseTensor t = build_orthogonal_tensor(spikes, cfg.dims, seed);
        std::vector<InitStrategy> inits;
        for (std::size_t l = 0; l < r; ++l)
            inits.push_back(cfg.strategy == "planted" ? InitStrategy::planted_at(spikes.components[l])
                                                      : InitStrategy::random(stream_key(seed, l)));
        const auto tuples = deflate_orthogonal(t, r, inits, power_opts(cfg));
        for (std::size_t l = 0; l < r; ++l) {
            Cell& c = cells[l * cfg.trials + trial];
            const auto& tup = tuples[l];
            c.lambda = tup.lambda;
            c.iters = tup.iterations;
            c.ok = tup.converged;
            c.cross = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                c.align.push_back(abs_dot(tup.vectors[k], spikes.components[l][k]));
                for (std::size_t m = 0; m < r; ++m)
                    if (m != l) c.cross = std::max(c.cross, abs_dot(tup.vectors[k], spikes.components[m][k]));
            }
        }
    });

    res.records.header = concat({"component", "beta", "trial", "seed", "lambda_hat"}, indexed("align_", d));
    res.records.header.insert(res.records.header.end(), {"cross_max", "iterations", "converged"});
    res.summary.header = concat({"component", "beta", "trials", "failures", "lambda_mean"}, indexed("align_mean_", d));
    res.summary.header = concat(res.summary.header, concat({"cross_mean", "cross_max", "theory_lambda"}, indexed("theory_align_", d)));
    for (std::size_t l = 0; l < r; ++l) {
        std::vector<double> lam, cross;
        std::vector<std::vector<double>> al(d);
        std::size_t fails = 0;
        for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
            const Cell& c = cells[l * cfg.trials + trial];
            std::vector<std::string> row{num(l + 1), num(betas[l]), num(trial), std::to_string(trial_seed(cfg, trial)), num(c.lambda)};
            for (double a : c.align) row.push_back(num(a));
            row.insert(row.end(), {num(c.cross), num(c.iters), c.ok ? "1" : "0"});
            res.records.add(std::move(row));
            if (!c.ok) {
                ++fails;
                continue;
            }
            lam.push_back(c.lambda);
            cross.push_back(c.cross);
            for (std::size_t k = 0; k < d; ++k) al[k].push_back(c.align[k]);
        }
        res.failures += fails;
        const Theory th = theory_for(betas[l], cfg.dims);
        std::vector<std::string> row{num(l + 1), num(betas[l]), num(cfg.trials), num(fails), num(stats(lam).mean)};
        for (std::size_t k = 0; k < d; ++k) row.push_back(num(stats(al[k]).mean));
        row.push_back(num(stats(cross).mean));
        row.push_back(num(cross.empty() ? kNaN : *std::max_element(cross.begin(), cross.end())));
        row.push_back(num(th.lambda));
        for (double a : th.align) row.push_back(num(a));
        res.summary.add(std::move(row));
    }
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    if (cfg.kind == "spectrum_compare") res = run_spectrum_compare(cfg);
    else if (cfg.kind == "alignment_sweep") res = run_alignment_sweep(cfg);
    else if (cfg.kind == "phase_diagram") res = run_phase_diagram(cfg);
    else if (cfg.kind == "snr_roundtrip") res = run_snr_roundtrip(cfg);
    else if (cfg.kind == "unfolding_compare") res = run_unfolding_compare(cfg);
    else res = run_rank_r(cfg);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---- output ----------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

void write_plots(const ExperimentResult& r, const std::filesystem::path& dir) {
    const auto& s = r.summary;
    const auto& k = r.config.kind;
    if (k == "spectrum_compare") {
        for (const auto& [stem, m] : r.measures) {
            const auto lo = m.column("bin_left"), hi = m.column("bin_right");
            std::vector<double> edges = lo;
            if (!hi.empty()) edges.push_back(hi.back());
            svg::Series th{"theory", {}, m.column("theory_density"), false};
            for (std::size_t b = 0; b < lo.size(); ++b) th.x.push_back(0.5 * (lo[b] + hi[b]));
            svg::histogram_plot((dir / (stem + ".svg")).string(), "spectrum " + stem, edges, m.column("density"), th);
        }
    } else if (k == "alignment_sweep") {
        const auto x = s.column("beta");
        std::vector<svg::Series> ser{{"theory", x, s.column("theory_align_1"), false},
                                     {"empirical", x, s.column("align_1_mean"), true}};
        svg::line_plot((dir / "alignment.svg").string(), "alignment, mode 1", "beta", ser);
        std::vector<svg::Series> lam{{"theory", x, s.column("theory_lambda"), false},
                                     {"empirical", x, s.column("lambda_mean"), true}};
        svg::line_plot((dir / "lambda.svg").string(), "singular value", "beta", lam);
    } else if (k == "phase_diagram") {
        std::vector<svg::Series> ser{{"threshold", s.column("order"), s.column("beta_s"), false},
                                     {"alignment at threshold", s.column("order"), s.column("alignment_at_threshold"), false}};
        svg::line_plot((dir / "phase.svg").string(), "phase diagram", "order", ser);
    } else if (k == "snr_roundtrip") {
        const auto x = s.column("beta");
        std::vector<svg::Series> ser{{"identity", x, x, false}, {"estimate", x, s.column("beta_hat_mean"), true}};
        svg::line_plot((dir / "snr.svg").string(), "SNR estimate", "beta", ser);
    } else if (k == "unfolding_compare") {
        const auto x = s.column("beta");
        std::vector<svg::Series> ser{{"theory", x, s.column("theory_align_mode"), false},
                                     {"empirical", x, s.column("align_mode_mean"), true}};
        svg::line_plot((dir / "unfolding.svg").string(), "unfolding alignment", "beta", ser);
    }
}

}  // namespace

void write_result(const ExperimentResult& r, const std::string& dir) {
    const std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    write_text(p / "config.json", r.config.to_json().dump(2) + "\n");
    write_text(p / "records.csv", r.records.csv());
    write_text(p / "summary.csv", r.summary.csv());
    for (const auto& [stem, t] : r.measures) write_text(p / (stem + ".csv"), t.csv());
    if (!r.scalars.empty()) write_text(p / "summary.json", r.scalars.dump(2) + "\n");
    nlohmann::json timing{{"wall_seconds", r.wall_seconds}, {"failures", r.failures}};
    write_text(p / "timing.json", timing.dump(2) + "\n");
    if (r.config.svg) write_plots(r, p);
}

}  // namespace spiked
