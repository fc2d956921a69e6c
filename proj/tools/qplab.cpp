// qplab command-line driver: check, symbol, run, norms, omega, sweep.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qplab/harness.hpp"

using namespace qplab;
using harness::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw PreconditionError("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

// "0:0.05,0.05:0.1"
std::vector<std::pair<double, double>> parse_intervals(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto c = item.find(':');
        if (c == std::string::npos) throw PreconditionError("interval must look like a:b");
        out.emplace_back(std::stod(item.substr(0, c)), std::stod(item.substr(c + 1)));
    }
    return out;
}

void emit(const std::string& text, const std::string& out_dir, const std::string& name) {
    if (out_dir.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(out_dir);
    harness::write_text(fs::path(out_dir) / name, text);
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harness::exit_io;
    } catch (const NonconvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harness::exit_nonconvergence;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harness::exit_admissibility;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harness::exit_io;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qplab: quasilinear parabolic toolkit"};
    app.require_subcommand(1);

    std::string config, out, input, resume;
    std::uint64_t seed = 0;
    bool force = false;

    // check
    auto* check = app.add_subcommand("check", "admissibility of the exponents section");
    std::string p, q, mu, beta, eps, order = "second";
    int n = 1;
    check->add_option("--config", config, "run config (uses its exponents section)");
    check->add_option("--p", p);
    check->add_option("--q", q);
    check->add_option("--mu", mu);
    check->add_option("--n", n);
    check->add_option("--beta", beta);
    check->add_option("--epsilon", eps);
    check->add_option("--order", order)->check(CLI::IsMember({"second", "fourth"}));

    // symbol
    auto* symbol = app.add_subcommand("symbol", "ellipticity and Lopatinskii-Shapiro scan");
    int directions = 32;
    symbol->add_option("--config", config, "config whose initial data is scanned");
    symbol->add_option("--input", input, "checkpoint; scans its last state");
    symbol->add_option("--seed", seed);
    symbol->add_option("--out", out);
    symbol->add_option("--directions", directions)->check(CLI::Range(16, 1 << 16));

    // run
    auto* run = app.add_subcommand("run", "continuation solve with diagnostics");
    bool have_seed = false;
    run->add_option("--config", config)->required();
    run->add_option("--seed", seed)->each([&](const std::string&) { have_seed = true; });
    run->add_flag("--force", force, "run even when the exponents are inadmissible");
    run->add_option("--out", out);
    run->add_option("--resume", resume, "continue from a checkpoint");

    // norms
    auto* norms = app.add_subcommand("norms", "time-weighted norms of a stored trajectory");
    std::string intervals;
    double nq = 2.0, delta = -1.0;
    int norder = 2;
    norms->add_option("--input", input)->required();
    norms->add_option("--intervals", intervals, "a:b,c:d (default: whole trajectory)");
    norms->add_option("--q", nq);
    norms->add_option("--order", norder)->check(CLI::IsMember({2, 4}));
    norms->add_option("--delta", delta, "smoothing check on [delta/2, delta]");
    norms->add_option("--out", out);

    // omega
    auto* omega = app.add_subcommand("omega", "omega-limit estimate from a stored trajectory");
    std::string times;
    double threshold = 1e-4;
    omega->add_option("--input", input)->required();
    omega->add_option("--times", times, "comma-separated sampling times")->required();
    omega->add_option("--threshold", threshold);
    omega->add_option("--out", out);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "cartesian-product parameter sweep");
    std::vector<std::string> axes;
    sweep->add_option("--config", config)->required();
    sweep->add_option("--axis", axes, "dotted.key=v1,v2 (repeatable)")->required();
    sweep->add_option("--seed", seed)->each([&](const std::string&) { have_seed = true; });
    sweep->add_flag("--force", force);
    sweep->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*check) {
        return guarded([&] {
            json ex;
            Order ord = parse_order(order);
            int dim = n;
            if (!config.empty()) {
                const json cfg = harness::load_json(config);
                ex = cfg.at("exponents");
                const json pj = cfg.value("problem", json::object());
                dim = pj.value("dim", dim);
                const std::string kind = pj.value("kind", std::string());
                if (kind == "bilaplacian" || kind == "surface_diffusion" || kind == "willmore") ord = Order::fourth;
                if (ex.contains("order")) ord = parse_order(ex.at("order").get<std::string>());
            }
            auto put = [&](const char* k, const std::string& v) {
                if (!v.empty()) ex[k] = v;
            };
            put("p", p);
            put("q", q);
            put("mu", mu);
            put("beta", beta);
            put("epsilon", eps);
            for (const char* k : {"p", "q", "mu"})
                if (!ex.contains(k)) throw PreconditionError(std::string("missing exponent '") + k + "'");
            json rep;
            try {
                rep = harness::admissibility_report(ex, dim, ord);
            } catch (const PreconditionError& e) {
                std::cerr << "inadmissible: " << e.what() << "\n";
                return static_cast<int>(harness::exit_admissibility);
            }
            std::cout << rep.dump(2) << "\n";
            if (!rep.value("admissible", false)) {
                std::cerr << "inadmissible: " << rep.value("violated", std::string()) << "\n";
                return static_cast<int>(harness::exit_admissibility);
            }
            return static_cast<int>(harness::exit_ok);
        });
    }

    if (*symbol) {
        return guarded([&] {
            GridFunction h;
            if (!input.empty()) {
                h = read_checkpoint(input).trajectory.states.back();
            } else if (!config.empty()) {
                h = harness::build_setup(harness::load_json(config), seed).u0;
            } else {
                throw PreconditionError("symbol needs --config or --input");
            }
            if (h.components() != 1) throw PreconditionError("symbol scan needs a scalar field");
            const json rep = harness::symbol_report(h, directions, log_space(1e-6, 1e6, 13), default_lambda_grid());
            emit(rep.dump(2) + "\n", out, "symbol.json");
            return static_cast<int>(harness::exit_ok);
        });
    }

    if (*run) {
        return guarded([&] {
            harness::RunOptions o;
            if (have_seed) o.seed = seed;
            o.force = force;
            if (!out.empty()) o.out_dir = out;
            if (!resume.empty()) o.resume = resume;
            const auto r = harness::run(harness::load_json(config), o);
            if (r.exit_code == harness::exit_ok) {
                std::cout << "ok: outputs in " << r.out_dir << "\n";
            } else {
                std::cerr << "error: " << r.message << "\n";
                if (r.report.contains("continuation")) std::cerr << r.report.at("continuation").at("windows").dump(2) << "\n";
            }
            return r.exit_code;
        });
    }

    if (*norms) {
        return guarded([&] {
            const Checkpoint cp = read_checkpoint(input);
            const auto& tr = cp.trajectory;
            auto iv = intervals.empty() ? std::vector<std::pair<double, double>>{{tr.start(), tr.end()}} : parse_intervals(intervals);
            emit(harness::norms_csv(harness::interval_norms(tr, iv, nq, norder)), out, "norms.csv");
            if (delta > 0.0) {
                const json s = harness::smoothing_json(tr, delta, nq, norder);
                if (out.empty()) std::cerr << s.dump(2) << "\n";
                else emit(s.dump(2) + "\n", out, "smoothing.json");
            }
            return static_cast<int>(harness::exit_ok);
        });
    }

    if (*omega) {
        return guarded([&] {
            const Checkpoint cp = read_checkpoint(input);
            const json rep = harness::omega_json(cp.trajectory, parse_list(times), cp.bc, threshold);
            emit(rep.dump(2) + "\n", out, "omega.json");
            return static_cast<int>(harness::exit_ok);
        });
    }

    if (*sweep) {
        return guarded([&] {
            std::vector<harness::SweepAxis> ax;
            for (const auto& a : axes) ax.push_back(harness::parse_axis(a));
            harness::RunOptions o;
            if (have_seed) o.seed = seed;
            o.force = force;
            const auto cells = harness::sweep(harness::load_json(config), ax, out, o);
            int failed = 0;
            for (const auto& c : cells) failed += c.result.exit_code != 0;
            std::cout << cells.size() << " cells, " << failed << " non-zero exits; summary in "
                      << (fs::path(out) / "summary.csv").string() << "\n";
            return static_cast<int>(harness::exit_ok);
        });
    }
    return 0;
}
