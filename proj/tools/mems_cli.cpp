// Command-line front end: evolutions, branch continuation, fold extraction,
// phase-plane quadrature, inner profiles, composite expansions, fold sweeps.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mems/asymptotics.hpp"
#include "mems/equilibrium.hpp"
#include "mems/evolution.hpp"
#include "mems/io.hpp"
#include "mems/phaseplane.hpp"

using namespace mems;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Args {
    int order = 2;
    double lambda = 1.0;
    double eps = 0.01;
    int m = 4;
    int n = 0;  // 0: resolution chosen from (order, eps)
    double smax = 1.9;
    double tend = 10.0;
    std::string eps_list = "0.005,0.01,0.02,0.04";
    std::string out = "out";
    std::string config;
    bool emit_plots = false;
};

Order order_of(int o) {
    if (o == 2) return Order::second;
    if (o == 4) return Order::fourth;
    throw CLI::ValidationError("--order", "must be 2 or 4");
}

ModelParams params_of(const Args& a) {
    ModelParams p{a.lambda, a.eps, a.m, order_of(a.order)};
    p.validate();
    return p;
}

void add_common(CLI::App* sub, Args& a, bool scalar_eps = true) {
    sub->add_option("--order", a.order, "Elastic operator order")
        ->check(CLI::IsMember({2, 4}));
    sub->add_option("--lambda", a.lambda, "Load parameter");
    if (scalar_eps) sub->add_option("--eps", a.eps, "Regularization parameter");
    sub->add_option("--m", a.m, "Regularization exponent (m > 2)");
    sub->add_option("--n", a.n, "Interior grid nodes (0: automatic)");
    sub->add_option("--smax", a.smax, "Continuation norm limit");
    sub->add_option("--out", a.out, "Output directory");
    sub->add_flag("--emit-plots", a.emit_plots, "Write matplotlib scripts");
    sub->add_option("--config", a.config, "Key=value config file; flags win")
        ->check(CLI::ExistingFile);
}

// Values from --config fill in options that were not given on the command
// line; keys are the long option names without the leading dashes.
void apply_config(CLI::App* sub, const Args& a) {
    if (a.config.empty()) return;
    std::ifstream in(a.config);
    if (!in) throw std::invalid_argument("config: cannot read " + a.config);
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        CLI::Option* o = sub->get_option_no_throw("--" + key);
        if (o == nullptr || key == "config")
            throw std::invalid_argument("config: unknown key '" + key + "'");
        if (o->count() > 0) continue; // command-line flags win
        o->add_result(val);
        o->run_callback();
    }
}

fs::path ensure_out(const Args& a) {
    fs::create_directories(a.out);
    return a.out;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream(p) << j.dump(2) << "\n";
}

void write_plot(const fs::path& p, const std::string& body) {
    std::ofstream(p) << "#!/usr/bin/env python3\n"
                        "import pandas as pd\n"
                        "import matplotlib\n"
                        "matplotlib.use('Agg')\n"
                        "import matplotlib.pyplot as plt\n"
                     << body;
}

int cmd_evolve(const Args& a) {
    const ModelParams p = params_of(a);
    const Grid g(a.n > 0 ? a.n : default_grid_n(p.order, p.eps));
    EvolveConfig c;
    c.t_end = a.tend;
    const Trajectory tr = evolve(Field(g), p, c);
    const fs::path out = ensure_out(a);
    io::write_trajectory(out / "trajectory.csv", tr, p, g.n);
    io::write_snapshots(out / "snapshots", tr, p);
    json j{{"order", a.order},      {"lambda", p.lambda}, {"eps", p.eps},
           {"m", p.m},              {"n", g.n},           {"steady", tr.steady},
           {"steps", tr.steps},     {"t_end", tr.times.back()},
           {"final_energy", tr.energies.back()},
           {"final_min_u", tr.snapshots.back().min()},
           {"max_energy_increase", tr.max_energy_increase}};
    if (tr.touchdown_time) {
        j["touchdown_time"] = *tr.touchdown_time;
        j["touchdown_x"] = *tr.touchdown_x;
    }
    write_json(out / "evolve.json", j);
    if (a.emit_plots)
        write_plot(out / "plot_evolve.py",
                   "import glob\n"
                   "tr = pd.read_csv('trajectory.csv', comment='#')\n"
                   "fig, ax = plt.subplots(1, 3, figsize=(13, 4))\n"
                   "snaps = sorted(glob.glob('snapshots/snapshot_*.csv'))\n"
                   "for s in snaps[:: max(1, len(snaps) // 12)]:\n"
                   "    d = pd.read_csv(s, comment='#')\n"
                   "    ax[0].plot(d.x, d.u, lw=0.8)\n"
                   "ax[0].set(xlabel='x', ylabel='u', title='profiles')\n"
                   "ax[1].plot(tr.t, tr.front_left, tr.t, tr.front_right)\n"
                   "ax[1].set(xlabel='t', title='front positions')\n"
                   "ax[2].plot(tr.t, tr.E)\n"
                   "ax[2].set(xlabel='t', ylabel='E', title='energy decay')\n"
                   "fig.tight_layout(); fig.savefig('evolve.png', dpi=150)\n");
    return 0;
}

int cmd_branch(const Args& a) {
    const Order o = order_of(a.order);
    const Branch br = trace_branch(a.eps, a.m, o, {a.smax, 0.02, a.n, 1e-10, true});
    const fs::path out = ensure_out(a);
    io::write_branch(out / "branch.csv", br);
    if (a.emit_plots)
        write_plot(out / "plot_branch.py",
                   "d = pd.read_csv('branch.csv', comment='#')\n"
                   "plt.plot(d['lambda'], d.s, '.-', ms=3)\n"
                   "plt.xlabel('lambda'); plt.ylabel('||u||^2')\n"
                   "plt.savefig('branch.png', dpi=150)\n");
    return 0;
}

int cmd_folds(const Args& a) {
    const Order o = order_of(a.order);
    const Branch br = trace_branch(a.eps, a.m, o, {a.smax, 0.02, a.n});
    const FoldSet f = find_folds(br);
    const fs::path out = ensure_out(a);
    io::write_branch(out / "branch.csv", br);
    json j{{"order", a.order}, {"eps", a.eps}, {"m", a.m}, {"lambda_c1", f.lambda_c1}};
    if (f.lambda_c2) j["lambda_c2"] = *f.lambda_c2;
    write_json(out / "folds.json", j);
    return 0;
}

int cmd_epscrit(const Args& a) {
    const Order o = order_of(a.order);
    TraceOptions opt;
    opt.n = a.n;
    const double ec = find_eps_c(a.m, o, opt);
    write_json(ensure_out(a) / "epscrit.json",
               {{"order", a.order}, {"m", a.m}, {"eps_c", ec}});
    return 0;
}

int cmd_phaseplane(const Args& a) {
    const LengthCurve lc = sample_length_curve(a.eps, a.m);
    const PhaseFolds pf = fold_points_from_curve(lc);
    const fs::path out = ensure_out(a);
    io::write_length_curve(out / "length_curve.csv", lc);
    json j{{"eps", a.eps}, {"m", a.m}, {"lambda_c1", pf.lambda_c1},
           {"alpha_max", lc.alpha_max}};
    if (pf.lambda_c2) j["lambda_c2"] = *pf.lambda_c2;
    if (lc.alpha_min) j["alpha_min"] = *lc.alpha_min;
    write_json(out / "phaseplane.json", j);
    if (a.emit_plots)
        write_plot(out / "plot_phaseplane.py",
                   "d = pd.read_csv('length_curve.csv', comment='#')\n"
                   "plt.plot(d.alpha, d.l_squared)\n"
                   "plt.xlabel('alpha'); plt.ylabel('l^2 = lambda')\n"
                   "plt.savefig('phaseplane.png', dpi=150)\n");
    return 0;
}

int cmd_inner(const Args& a) {
    const Order o = order_of(a.order);
    const InnerProfile& pr = detail::cached_profile(o, a.lambda, a.m);
    const fs::path out = ensure_out(a);
    io::write_profile(out / "profile.csv", pr);
    json j{{"order", a.order}, {"lambda", a.lambda}, {"m", a.m},
           {"lambda0c", lambda0c_of(o, a.m)}};
    if (o == Order::second) {
        const ExpansionCoeffsL c = coeffs_laplacian(a.lambda, a.m);
        j["gamma"] = c.gamma;
        j["lambda1c"] = c.lambda1c;
        j["lambda2c"] = c.lambda2c;
        j["a_half"] = c.a_half;
        j["a1"] = c.a1;
    } else {
        const ExpansionCoeffsB c = coeffs_bilaplacian(a.lambda, a.m);
        j["b0"] = pr.b0;
        j["c0"] = pr.c0;
        j["d0"] = pr.d0;
        j["xi0"] = pr.xi0;
        j["v_min"] = pr.v_min;
        j["first_integral_residual"] = pr.first_integral_residual;
        j["lambda1c"] = c.lambda1c;
        j["lambda2c"] = c.lambda2c;
        j["alpha1"] = c.alpha1;
        j["alpha2"] = c.alpha2;
        j["beta1"] = c.beta1;
    }
    write_json(out / "inner.json", j);
    if (a.emit_plots)
        write_plot(out / "plot_inner.py",
                   "d = pd.read_csv('profile.csv', comment='#')\n"
                   "plt.plot(d.xi, d.v)\n"
                   "plt.xlabel('xi'); plt.ylabel('v')\n"
                   "plt.savefig('inner.png', dpi=150)\n");
    return 0;
}

int cmd_composite(const Args& a) {
    const ModelParams p = params_of(a);
    const Grid g(a.n > 0 ? a.n : default_grid_n(p.order, p.eps));
    Field f(g);
    json j{{"order", a.order}, {"lambda", p.lambda}, {"eps", p.eps}, {"m", p.m}};
    if (p.order == Order::second) {
        f = composite_laplacian(p.lambda, p.eps, p.m, g);
        const ExpansionCoeffsL c = coeffs_laplacian(p.lambda, p.m);
        j["contact_point"] = contact_point_laplacian(p.lambda, p.eps, p.m, c.gamma);
        j["norm_sq"] = norm_sq_laplacian(p.lambda, p.eps, p.m);
    } else {
        const InnerProfile& pr = detail::cached_profile(Order::fourth, p.lambda, p.m);
        f = composite_bilaplacian(p.lambda, p.eps, p.m, pr, g);
        j["contact_point"] = contact_point_bilaplacian(p.lambda, p.eps, p.m, pr.xi0);
        j["norm_sq"] = norm_sq_bilaplacian(p.lambda, p.eps, p.m);
    }
    const fs::path out = ensure_out(a);
    io::write_field(out / "composite.csv", f, p);
    write_json(out / "composite.json", j);
    if (a.emit_plots)
        write_plot(out / "plot_composite.py",
                   "d = pd.read_csv('composite.csv', comment='#')\n"
                   "plt.plot(d.x, d.u)\n"
                   "plt.xlabel('x'); plt.ylabel('u')\n"
                   "plt.savefig('composite.png', dpi=150)\n");
    return 0;
}

int cmd_sweep(const Args& a) {
    const Order o = order_of(a.order);
    std::vector<double> eps;
    for (std::stringstream ss(a.eps_list); ss.good();) {
        std::string tok;
        std::getline(ss, tok, ',');
        if (!tok.empty()) eps.push_back(std::stod(tok));
    }
    if (eps.size() < 2)
        throw CLI::ValidationError("--eps", "sweep needs at least two values");

    // worker pool over the eps tuples; each worker owns its slot in the table
    std::vector<FoldSample> table(eps.size());
    std::vector<std::string> errors(eps.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i; (i = next.fetch_add(1)) < eps.size();) {
            try {
                TraceOptions opt;
                opt.n = a.n;
                table[i] = fold_scaling(o, a.m, {eps[i]}, opt).front();
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const size_t nthreads =
        std::min(eps.size(), (size_t)std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (size_t k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (size_t i = 0; i < eps.size(); ++i)
        if (!errors[i].empty())
            throw NoConvergence("sweep at eps=" + std::to_string(eps[i]) + ": " + errors[i]);

    std::vector<double> le, ll;
    for (const auto& s : table) {
        le.push_back(std::log(s.eps));
        ll.push_back(std::log(s.lambda_c2));
    }
    const LineFit fit = fit_line(le, ll);

    const fs::path out = ensure_out(a);
    io::Csv c(out / "sweep.csv");
    c.meta("order", io::order_tag(o));
    c.meta("m", io::num((double)a.m));
    c.meta("slope", fit.slope);
    c.header({"eps", "lambda_c2"});
    for (const auto& s : table) c.row({s.eps, s.lambda_c2});
    json j{{"order", a.order}, {"m", a.m}, {"slope", fit.slope},
           {"intercept", fit.intercept}};
    for (const auto& s : table) j["lambda_c2"][io::num(s.eps)] = s.lambda_c2;
    write_json(out / "sweep.json", j);
    if (a.emit_plots)
        write_plot(out / "plot_sweep.py",
                   "d = pd.read_csv('sweep.csv', comment='#')\n"
                   "plt.loglog(d.eps, d.lambda_c2, 'o-')\n"
                   "plt.xlabel('eps'); plt.ylabel('lambda_c2')\n"
                   "plt.savefig('sweep.png', dpi=150)\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized electrostatic-MEMS toolkit"};
    app.require_subcommand(1);
    Args a;

    auto* evolve_cmd = app.add_subcommand("evolve", "Gradient-flow evolution from u0 = 0");
    add_common(evolve_cmd, a);
    evolve_cmd->add_option("--tend", a.tend, "Final time");
    auto* branch_cmd = app.add_subcommand("branch", "Trace the bifurcation diagram");
    add_common(branch_cmd, a);
    auto* folds_cmd = app.add_subcommand("folds", "Fold points of the branch");
    add_common(folds_cmd, a);
    auto* epscrit_cmd = app.add_subcommand("epscrit", "Fold-merging threshold eps_c");
    add_common(epscrit_cmd, a);
    auto* phase_cmd = app.add_subcommand("phaseplane", "Phase-plane length curve");
    add_common(phase_cmd, a);
    auto* inner_cmd = app.add_subcommand("inner", "Inner transition-layer profile");
    add_common(inner_cmd, a);
    auto* comp_cmd = app.add_subcommand("composite", "Composite asymptotic expansion");
    add_common(comp_cmd, a);
    auto* sweep_cmd = app.add_subcommand("sweep", "Fold scaling over an eps list");
    add_common(sweep_cmd, a, false);
    sweep_cmd->add_option("--eps", a.eps_list, "Comma-separated eps values");

    try {
        app.parse(argc, argv);
        for (CLI::App* sub : app.get_subcommands()) apply_config(sub, a);
        if (evolve_cmd->parsed()) return cmd_evolve(a);
        if (branch_cmd->parsed()) return cmd_branch(a);
        if (folds_cmd->parsed()) return cmd_folds(a);
        if (epscrit_cmd->parsed()) return cmd_epscrit(a);
        if (phase_cmd->parsed()) return cmd_phaseplane(a);
        if (inner_cmd->parsed()) return cmd_inner(a);
        if (comp_cmd->parsed()) return cmd_composite(a);
        if (sweep_cmd->parsed()) return cmd_sweep(a);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
