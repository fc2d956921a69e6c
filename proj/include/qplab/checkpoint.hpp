#pragma once

// Plain-text trajectory files. A window checkpoint is a one-sample trajectory
// that also carries the continuation cursor (next window length and index).
// Values are written with %.17g so a load reproduces every double exactly.
//
//   qplab-checkpoint 1
//   dim 1
//   nodes 64
//   components 1
//   bc neumann
//   mu 0.90000000000000002
//   p 2
//   next_window 0.02
//   window_index 3
//   samples 1
//   derivs 0
//   t 0.059999999999999998
//   <values...>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"
#include "qplab/weighted_norms.hpp"

namespace qplab {

inline constexpr const char* kCheckpointMagic = "qplab-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    BoundaryCondition bc = BoundaryCondition::neumann;
    WeightedTrajectory trajectory;
    double next_window = 0.0;
    int window_index = 0;

    const Grid& grid() const { return trajectory.states.front().grid(); }
    int components() const { return trajectory.states.front().components(); }
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_checkpoint(const std::string& path, const Checkpoint& cp) {
    cp.trajectory.validate();
    std::ostringstream os;
    const Grid& g = cp.grid();
    os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
       << "dim " << g.dim() << '\n'
       << "nodes " << g.nodes_per_axis() << '\n'
       << "components " << cp.components() << '\n'
       << "bc " << to_string(cp.bc) << '\n'
       << "mu " << format_double(cp.trajectory.mu) << '\n'
       << "p " << format_double(cp.trajectory.p) << '\n'
       << "next_window " << format_double(cp.next_window) << '\n'
       << "window_index " << cp.window_index << '\n'
       << "samples " << cp.trajectory.size() << '\n'
       << "derivs " << (cp.trajectory.has_derivs() ? 1 : 0) << '\n';
    auto row = [&](const GridFunction& f) {
        const auto& v = f.values();
        for (Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
        os << '\n';
    };
    for (std::size_t k = 0; k < cp.trajectory.size(); ++k) {
        os << "t " << format_double(cp.trajectory.times[k]) << '\n';
        row(cp.trajectory.states[k]);
        if (cp.trajectory.has_derivs()) row(cp.trajectory.derivs[k]);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << os.str();
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    auto fail = [&](const std::string& what) { return IoError("malformed checkpoint '" + path + "': " + what); };

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kCheckpointMagic) throw fail("missing header");
    if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

    auto key = [&](const char* name) {
        std::string k;
        if (!(in >> k) || k != name) throw fail(std::string("expected '") + name + "'");
    };
    int dim = 0, nodes = 0, comps = 0, derivs = 0;
    std::size_t samples = 0;
    std::string bc;
    Checkpoint cp;
    key("dim");
    in >> dim;
    key("nodes");
    in >> nodes;
    key("components");
    in >> comps;
    key("bc");
    in >> bc;
    key("mu");
    in >> cp.trajectory.mu;
    key("p");
    in >> cp.trajectory.p;
    key("next_window");
    in >> cp.next_window;
    key("window_index");
    in >> cp.window_index;
    key("samples");
    in >> samples;
    key("derivs");
    in >> derivs;
    if (!in || samples == 0 || comps < 1) throw fail("bad header values");

    try {
        cp.bc = parse_boundary_condition(bc);
        const Grid g(dim, nodes);
        auto read_row = [&] {
            Eigen::VectorXd v(g.size() * comps);
            for (Index i = 0; i < v.size(); ++i)
                if (!(in >> v[i])) throw fail("truncated values");
            return GridFunction(g, comps, std::move(v));
        };
        for (std::size_t k = 0; k < samples; ++k) {
            double t = 0.0;
            key("t");
            if (!(in >> t)) throw fail("bad time");
            cp.trajectory.times.push_back(t);
            cp.trajectory.states.push_back(read_row());
            if (derivs) cp.trajectory.derivs.push_back(read_row());
        }
    } catch (const PreconditionError& e) {
        throw fail(e.what());
    }
    cp.trajectory.validate();
    return cp;
}

}  // namespace qplab
