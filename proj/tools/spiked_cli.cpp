#include "spiked/asymptotics.hpp"
#include "spiked/block_matrix.hpp"
#include "spiked/estimation.hpp"
#include "spiked/harness.hpp"
#include "spiked/io.hpp"
#include "spiked/rng.hpp"
#include "spiked/spectral.hpp"
#include "spiked/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace spiked;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Doubles in JSON output carry 15 significant digits.
double r15(double x) {
    if (!std::isfinite(x)) return x;
    const std::string s = fmt_num(x);
    return std::strtod(s.c_str(), nullptr);
}

json jnum(double x) { return std::isfinite(x) ? json(r15(x)) : json(nullptr); }

json jvec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(jnum(x));
    return a;
}

double parse_double(const std::string& s) {
    double x = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("not a number: " + s);
    return x;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// "a:b:step" (inclusive, tolerant to rounding) or a comma list.
std::vector<double> parse_grid(const std::string& s) {
    if (s.find(':') == std::string::npos) return parse_list(s);
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) throw UsageError("grid must be lo:hi:step with step > 0");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    return out;
}

Dims parse_dims(const std::string& s) {
    Dims out;
    for (double x : parse_list(s)) {
        if (!(x >= 1.0) || x != std::floor(x)) throw UsageError("dims must be positive integers");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

std::string default_out(const std::string& leaf) {
    const char* env = std::getenv("SPIKED_OUT_DIR");
    return (fs::path(env && *env ? env : "spiked_out") / leaf).string();
}

void write_text(const fs::path& p, const std::string& s) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << s;
}

// Ratios from --c (renormalized with a warning) or --cubic d.
RatioVector ratios_from(const std::string& c_text, int cubic) {
    if (!c_text.empty() && cubic > 0) throw UsageError("give either --c or --cubic, not both");
    if (cubic > 0) {
        if (cubic < 2) throw UsageError("--cubic needs an order >= 2");
        return RatioVector::uniform(static_cast<std::size_t>(cubic));
    }
    if (c_text.empty()) throw UsageError("one of --c or --cubic is required");
    auto c = parse_list(c_text);
    double sum = 0.0;
    for (double x : c) {
        if (!(x >= 0.0)) throw UsageError("ratios must be nonnegative");
        sum += x;
    }
    if (!(sum > 0.0)) throw UsageError("ratios must not all be zero");
    if (std::abs(sum - 1.0) > 1e-9) {
        std::cerr << "warning: ratios sum to " << fmt_num(sum) << "; renormalizing\n";
        for (auto& x : c) x /= sum;
    }
    return RatioVector(c);
}

json prediction_json(const AsymptoticPrediction& p) {
    return json{{"beta", jnum(p.beta)},
                {"lambda_inf", jnum(p.lambda_inf)},
                {"alignments", jvec(p.alignments)},
                {"above_threshold", p.above_threshold}};
}

// ---- figure presets --------------------------------------------------------

struct Preset {
    std::string sub;  // subdirectory, empty for a single run
    ExperimentConfig cfg;
};

std::vector<double> steps(double lo, double hi, double step) {
    std::vector<double> v;
    for (long k = 0; lo + static_cast<double>(k) * step <= hi + 1e-9; ++k) v.push_back(lo + static_cast<double>(k) * step);
    return v;
}

ExperimentConfig base_cfg(const std::string& kind, Dims dims, std::vector<double> grid, std::size_t trials) {
    ExperimentConfig c;
    c.kind = kind;
    c.dims = std::move(dims);
    c.beta_grid = std::move(grid);
    c.trials = trials;
    return c;
}

std::vector<Preset> figure_presets(int fig) {
    std::vector<Preset> out;
    switch (fig) {
    case 2: out.push_back({"", base_cfg("spectrum_compare", {300, 300, 300}, {0.0}, 1)}); break;
    case 3: {
        auto c = base_cfg("spectrum_compare", {100, 100, 100}, {0.0}, 1);
        c.dependent = true;
        c.strategy = "random";
        c.max_sweeps = 5000;
        out.push_back({"", c});
        break;
    }
    case 4: out.push_back({"", base_cfg("alignment_sweep", {50, 100, 150}, steps(0.5, 4.0, 0.25), 5)}); break;
    case 5: out.push_back({"", base_cfg("alignment_sweep", {60, 60, 60}, steps(1.0, 4.0, 0.2), 5)}); break;
    case 6: out.push_back({"", base_cfg("spectrum_compare", {150, 450}, {0.0}, 1)}); break;
    case 7:
        out.push_back({"c_0.5", base_cfg("alignment_sweep", {200, 200}, steps(0.1, 3.0, 0.1), 5)});
        out.push_back({"c_0.1", base_cfg("alignment_sweep", {40, 360}, steps(0.1, 3.0, 0.1), 5)});
        out.push_back({"c_0.02", base_cfg("alignment_sweep", {8, 392}, steps(0.1, 3.0, 0.1), 5)});
        break;
    case 8: out.push_back({"", base_cfg("alignment_sweep", {400, 400}, steps(0.2, 3.0, 0.2), 10)}); break;
    case 9: {
        auto c = base_cfg("phase_diagram", {}, {}, 1);
        for (int d = 3; d <= 12; ++d) c.orders.push_back(d);
        out.push_back({"", c});
        break;
    }
    case 10: out.push_back({"", base_cfg("spectrum_compare", {50, 50, 50, 50}, {0.0}, 1)}); break;
    case 11: {
        auto c = base_cfg("spectrum_compare", {40, 40, 40, 40}, {0.0}, 1);
        c.dependent = true;
        c.strategy = "random";
        c.max_sweeps = 5000;
        out.push_back({"", c});
        break;
    }
    default: throw UsageError("figure must be one of 2..11");
    }
    return out;
}

// Shrinks a preset to smoke-test size.
void quicken(ExperimentConfig& c) {
    for (auto& n : c.dims) n = std::max<std::size_t>(n / 4, 2);
    c.trials = 1;
    if (c.beta_grid.size() > 4) {
        std::vector<double> g;
        const auto stride = c.beta_grid.size() / 4;
        for (std::size_t k = 0; k < c.beta_grid.size() && g.size() < 4; k += stride) g.push_back(c.beta_grid[k]);
        c.beta_grid = g;
    }
}

void print_summary(const ExperimentResult& r, const std::string& dir) {
    json j{{"kind", r.config.kind}, {"output_dir", dir}, {"failures", r.failures}};
    if (!r.scalars.empty()) j["scalars"] = r.scalars;
    std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiked tensor models: random-matrix theory and simulation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Asymptotic singular value and alignments");
    double p_beta = 0.0;
    std::string p_grid, p_c, p_out;
    int p_cubic = 0;
    auto* p_beta_opt = predict_cmd->add_option("--beta", p_beta, "Signal strength");
    auto* p_grid_opt = predict_cmd->add_option("--beta-grid", p_grid, "lo:hi:step or comma list");
    predict_cmd->add_option("--c", p_c, "Dimension ratios c1,c2,...");
    predict_cmd->add_option("--cubic", p_cubic, "Uniform ratios of this order");
    auto* p_out_opt = predict_cmd->add_option("--out", p_out, "Prediction CSV path");
    p_beta_opt->excludes(p_grid_opt);
    predict_cmd->callback([&] {
        if (!p_beta_opt->count() && !p_grid_opt->count()) throw UsageError("--beta or --beta-grid is required");
        const RatioVector c = ratios_from(p_c, p_cubic);
        const std::vector<double> grid = p_beta_opt->count() ? std::vector<double>{p_beta} : parse_grid(p_grid);
        for (double b : grid)
            if (!(b >= 0.0)) throw UsageError("beta must be >= 0");
        const auto rep = threshold_report(c);
        Table t;
        t.header = {"beta", "lambda_inf"};
        for (std::size_t k = 1; k <= c.order(); ++k) t.header.push_back("q_" + std::to_string(k));
        t.header.push_back("above_threshold");
        json preds = json::array();
        for (double b : grid) {
            const auto p = predict(b, c);
            std::vector<std::string> row{fmt_num(b), fmt_num(p.lambda_inf)};
            for (double a : p.alignments) row.push_back(fmt_num(a));
            row.push_back(p.above_threshold ? "1" : "0");
            t.add(row);
            preds.push_back(prediction_json(p));
        }
        const std::string path = p_out_opt->count() ? p_out : default_out("predict/prediction.csv");
        write_text(path, t.csv());
        json j{{"c", jvec(c.values())},
               {"d", c.order()},
               {"beta_s", jnum(rep.beta_s)},
               {"right_edge", jnum(rep.right_edge)},
               {"lambda_at_edge", jnum(rep.fold_lambda)},
               {"csv", path}};
        if (grid.size() == 1) j["prediction"] = preds[0];
        std::cout << j.dump(2) << "\n";
    });

    // spectrum
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Spectrum of the block contraction matrix against its limiting law");
    std::string s_dims, s_out, s_strategy = "random";
    double s_beta = 0.0;
    std::uint64_t s_seed = 1;
    std::size_t s_bins = 100;
    int s_max_sweeps = 5000;
    bool s_dependent = false, s_svg = false;
    spectrum_cmd->add_option("--dims", s_dims, "Mode sizes n1,n2,...")->required();
    spectrum_cmd->add_option("--beta", s_beta, "Signal strength")->required();
    spectrum_cmd->add_option("--seed", s_seed, "Seed");
    auto* dep_flag = spectrum_cmd->add_flag("--dependent", s_dependent, "Use power-iteration singular vectors");
    spectrum_cmd->add_flag("--independent", "Use independent uniform unit vectors (default)")->excludes(dep_flag);
    spectrum_cmd->add_option("--strategy", s_strategy, "random or planted (dependent case)")->check(CLI::IsMember({"random", "planted"}));
    spectrum_cmd->add_option("--max-sweeps", s_max_sweeps, "Power-iteration sweep cap");
    spectrum_cmd->add_option("--bins", s_bins, "Histogram bins")->check(CLI::PositiveNumber);
    auto* s_out_opt = spectrum_cmd->add_option("--out", s_out, "Output directory");
    spectrum_cmd->add_flag("--svg", s_svg, "Also write an SVG overlay");
    spectrum_cmd->callback([&] {
        const Dims dims = parse_dims(s_dims);
        if (dims.size() < 2) throw UsageError("--dims needs at least two modes");
        if (!(s_beta >= 0.0)) throw UsageError("--beta must be >= 0");
        const std::string dir = s_out_opt->count() ? s_out : default_out("spectrum");
        const auto model = SpikeModel::random(s_beta, dims, s_seed);
        const DenseTensor t = build_spiked_tensor(model, s_seed);
        std::vector<Vec> vs;
        json j{{"dims", dims}, {"beta", jnum(s_beta)}, {"seed", s_seed}};
        double lambda = NAN;
        if (s_dependent) {
            PowerOptions opts;
            opts.max_sweeps = s_max_sweeps;
            const auto init = s_strategy == "planted" && s_beta > 0.0 ? InitStrategy::planted_at(as_vecs(model.components))
                                                                      : InitStrategy::random(s_seed);
            const auto tup = power_iteration(t, init, opts);
            if (!tup.converged) throw NumericError("power iteration did not converge within --max-sweeps");
            vs = tup.vectors;
            lambda = tup.lambda;
            j["iterations"] = tup.iterations;
        } else {
            for (std::size_t k = 0; k < dims.size(); ++k)
                vs.push_back(UnitVector::random(dims[k], s_seed, streams::probe_base + k).vec());
        }
        const BlockMatrix pm = phi(t, vs);
        const Spectrum sp = eig_sym(pm, false);
        const LimitingMeasure law = dims.size() == 2
            ? LimitingMeasure::matrix(static_cast<double>(dims[0]) / static_cast<double>(dims[0] + dims[1]))
            : LimitingMeasure::for_ratios(RatioVector::from_dims(dims));
        const auto em = empirical_measure(sp, s_bins);

        std::ostringstream eig;
        for (Eigen::Index k = 0; k < sp.eigenvalues.size(); ++k) eig << fmt_num(sp.eigenvalues[k]) << '\n';
        write_text(fs::path(dir) / "eigenvalues.csv", eig.str());
        Table meas, theory;
        meas.header = {"bin_left", "bin_right", "density"};
        theory.header = {"x", "density"};
        svg::Series overlay{"theory", {}, {}, false};
        for (std::size_t b = 0; b < em.densities.size(); ++b) {
            meas.add({fmt_num(em.bin_edges[b]), fmt_num(em.bin_edges[b + 1]), fmt_num(em.densities[b])});
            const double x = 0.5 * (em.bin_edges[b] + em.bin_edges[b + 1]);
            const double dens = law.density(x);
            theory.add({fmt_num(x), fmt_num(dens)});
            overlay.x.push_back(x);
            overlay.y.push_back(dens);
        }
        write_text(fs::path(dir) / "measure.csv", meas.csv());
        write_text(fs::path(dir) / "theory_density.csv", theory.csv());
        if (s_svg) svg::histogram_plot((fs::path(dir) / "spectrum.svg").string(), "spectrum", em.bin_edges, em.densities, overlay);

        const double top = sp.eigenvalues[sp.eigenvalues.size() - 1];
        j["ks"] = jnum(ks_distance(sp, law));
        j["top_eigenvalue"] = jnum(top);
        j["theory_right_edge"] = jnum(law.right_edge());
        j["theory_atom"] = jnum(law.atom_at_zero());
        if (s_dependent) {
            const double expected = static_cast<double>(pm.d - 1) * lambda;
            j["isolated_eigenvalue"] = json{{"lambda", jnum(lambda)}, {"expected", jnum(expected)}, {"observed", jnum(top)},
                                            {"abs_error", jnum(std::abs(top - expected))}};
        }
        j["output_dir"] = dir;
        write_text(fs::path(dir) / "summary.json", j.dump(2) + "\n");
        std::cout << j.dump(2) << "\n";
    });

    // phase
    auto* phase_cmd = app.add_subcommand("phase", "Threshold, edge and alignment by tensor order (uniform ratios)");
    int ph_lo = 3, ph_hi = 12;
    std::string ph_out;
    phase_cmd->add_option("--min-order", ph_lo, "Smallest order")->check(CLI::Range(3, 64));
    phase_cmd->add_option("--max-order", ph_hi, "Largest order")->check(CLI::Range(3, 64));
    auto* ph_out_opt = phase_cmd->add_option("--out", ph_out, "Output directory");
    phase_cmd->callback([&] {
        if (ph_hi < ph_lo) throw UsageError("--max-order must be >= --min-order");
        ExperimentConfig cfg;
        cfg.kind = "phase_diagram";
        for (int d = ph_lo; d <= ph_hi; ++d) cfg.orders.push_back(d);
        const auto r = run_experiment(cfg);
        const std::string dir = ph_out_opt->count() ? ph_out : default_out("phase");
        write_result(r, dir);
        std::cout << r.summary.csv();
    });

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte-Carlo experiment");
    std::string sim_config, sim_kind, sim_dims, sim_grid, sim_strategy, sim_out, sim_orders, sim_betas;
    std::size_t sim_trials = 1, sim_bins = 100, sim_mode = 0;
    std::uint64_t sim_seed = 1;
    unsigned sim_threads = 0;
    double sim_tol = 1e-10;
    int sim_sweeps = 1000;
    bool sim_svg = false, sim_dep = false, sim_rel = false;
    sim_cmd->add_option("--config", sim_config, "JSON config file; flags override it")->check(CLI::ExistingFile);
    auto* o_kind = sim_cmd->add_option("--experiment", sim_kind, "Experiment kind");
    auto* o_dims = sim_cmd->add_option("--dims", sim_dims, "Mode sizes");
    auto* o_grid = sim_cmd->add_option("--beta-grid", sim_grid, "lo:hi:step or comma list");
    auto* o_trials = sim_cmd->add_option("--trials", sim_trials, "Trials per grid point");
    auto* o_seed = sim_cmd->add_option("--seed", sim_seed, "Base seed");
    auto* o_strat = sim_cmd->add_option("--strategy", sim_strategy, "random, planted or annealed");
    auto* o_bins = sim_cmd->add_option("--bins", sim_bins, "Histogram bins");
    auto* o_out = sim_cmd->add_option("--out", sim_out, "Output directory");
    auto* o_orders = sim_cmd->add_option("--orders", sim_orders, "Orders for phase_diagram");
    auto* o_betas = sim_cmd->add_option("--betas", sim_betas, "Spike strengths for rank_r");
    auto* o_mode = sim_cmd->add_option("--mode", sim_mode, "Unfolding mode");
    auto* o_tol = sim_cmd->add_option("--tol", sim_tol, "Power-iteration tolerance");
    auto* o_sweeps = sim_cmd->add_option("--max-sweeps", sim_sweeps, "Power-iteration sweep cap");
    auto* o_threads = sim_cmd->add_option("--threads", sim_threads, "Worker threads (0: all cores)");
    auto* o_svg = sim_cmd->add_flag("--svg", sim_svg, "Write SVG plots");
    auto* o_dep = sim_cmd->add_flag("--dependent", sim_dep, "spectrum_compare with power-iteration vectors");
    auto* o_rel = sim_cmd->add_flag("--beta-relative", sim_rel, "unfolding_compare grid in threshold units");
    sim_cmd->callback([&] {
        ExperimentConfig cfg;
        if (!sim_config.empty()) {
            std::ifstream in(sim_config);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                throw UsageError(std::string("cannot parse config: ") + e.what());
            }
            cfg = ExperimentConfig::from_json(j);
        }
        if (o_kind->count()) cfg.kind = sim_kind;
        if (o_dims->count()) cfg.dims = parse_dims(sim_dims);
        if (o_grid->count()) cfg.beta_grid = parse_grid(sim_grid);
        if (o_trials->count()) cfg.trials = sim_trials;
        if (o_seed->count()) cfg.base_seed = sim_seed;
        if (o_strat->count()) cfg.strategy = sim_strategy;
        if (o_bins->count()) cfg.bins = sim_bins;
        if (o_out->count()) cfg.output_dir = sim_out;
        if (o_orders->count()) {
            cfg.orders.clear();
            for (double d : parse_list(sim_orders)) cfg.orders.push_back(static_cast<int>(d));
        }
        if (o_betas->count()) cfg.betas = parse_list(sim_betas);
        if (o_mode->count()) cfg.mode = sim_mode;
        if (o_tol->count()) cfg.tol = sim_tol;
        if (o_sweeps->count()) cfg.max_sweeps = sim_sweeps;
        if (o_threads->count()) cfg.threads = sim_threads;
        if (o_svg->count()) cfg.svg = sim_svg;
        if (o_dep->count()) cfg.dependent = sim_dep;
        if (o_rel->count()) cfg.beta_relative = sim_rel;
        if (cfg.output_dir.empty()) cfg.output_dir = default_out(cfg.kind);
        const auto r = run_experiment(cfg);
        write_result(r, cfg.output_dir);
        print_summary(r, cfg.output_dir);
    });

    // estimate-snr
    auto* snr_cmd = app.add_subcommand("estimate-snr", "Invert an observed singular value into a signal strength");
    double e_lambda = 0.0;
    std::string e_c;
    int e_cubic = 0;
    snr_cmd->add_option("--lambda", e_lambda, "Observed singular value")->required();
    snr_cmd->add_option("--c", e_c, "Dimension ratios c1,c2,...");
    snr_cmd->add_option("--cubic", e_cubic, "Uniform ratios of this order");
    snr_cmd->callback([&] {
        const RatioVector c = ratios_from(e_c, e_cubic);
        const double edge = right_edge(c);
        json j{{"lambda", jnum(e_lambda)}, {"right_edge", jnum(edge)}};
        try {
            j["beta_hat"] = jnum(estimate_snr_from_lambda(e_lambda, c));
        } catch (const BelowEdgeError& e) {
            j["beta_hat"] = nullptr;
            j["below_edge"] = true;
            std::cout << j.dump(2) << "\n";
            throw;
        }
        std::cout << j.dump(2) << "\n";
    });

    // unfold
    auto* unfold_cmd = app.add_subcommand("unfold", "Matrix prediction for a mode unfolding");
    std::string u_dims;
    double u_beta = 0.0;
    std::size_t u_mode = 0;
    unfold_cmd->add_option("--dims", u_dims, "Mode sizes")->required();
    unfold_cmd->add_option("--beta", u_beta, "Signal strength (tensor units)")->required();
    unfold_cmd->add_option("--mode", u_mode, "Unfolding mode (0-based)");
    unfold_cmd->callback([&] {
        const Dims dims = parse_dims(u_dims);
        if (dims.size() < 3) throw UsageError("--dims needs an order >= 3 tensor");
        if (u_mode >= dims.size()) throw UsageError("--mode out of range");
        const auto map = unfolding_map(dims, u_mode);
        const auto p = predict_unfolding(u_beta, dims, u_mode);
        json j{{"dims", dims},
               {"mode", u_mode},
               {"beta", jnum(u_beta)},
               {"threshold", jnum(unfolding_threshold(dims))},
               {"matrix_c", jnum(map.c)},
               {"matrix_beta", jnum(u_beta * map.beta_scale)},
               {"sigma_inf", jnum(p.lambda_inf)},
               {"align_mode", jnum(p.align_x)},
               {"align_rest", jnum(p.align_y)},
               {"above_threshold", p.above_threshold}};
        std::cout << j.dump(2) << "\n";
    });

    // reproduce-figure
    auto* fig_cmd = app.add_subcommand("reproduce-figure", "Run a canned desk-scale configuration");
    int f_fig = 0;
    std::string f_out;
    unsigned f_threads = 0;
    std::size_t f_bins = 100;
    bool f_quick = false, f_nosvg = false;
    fig_cmd->add_option("--figure", f_fig, "Figure number 2..11")->required();
    auto* f_out_opt = fig_cmd->add_option("--out", f_out, "Output directory");
    fig_cmd->add_option("--threads", f_threads, "Worker threads (0: all cores)");
    fig_cmd->add_option("--bins", f_bins, "Histogram bins")->check(CLI::PositiveNumber);
    fig_cmd->add_flag("--quick", f_quick, "Smoke-test sizes");
    fig_cmd->add_flag("--no-svg", f_nosvg, "Data only");
    fig_cmd->callback([&] {
        const std::string root = f_out_opt->count() ? f_out : default_out("figure" + std::to_string(f_fig));
        for (auto& p : figure_presets(f_fig)) {
            p.cfg.threads = f_threads;
            p.cfg.bins = f_bins;
            p.cfg.svg = !f_nosvg;
            if (f_quick) quicken(p.cfg);
            p.cfg.output_dir = p.sub.empty() ? root : (fs::path(root) / p.sub).string();
            const auto r = run_experiment(p.cfg);
            write_result(r, p.cfg.output_dir);
            print_summary(r, p.cfg.output_dir);
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (auto* sub : app.get_subcommands()) std::cerr << sub->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
