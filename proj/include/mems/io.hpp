#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "evolution.hpp"
#include "asymptotics.hpp"
#include "phaseplane.hpp"

namespace mems::io {

// Deterministic numeric formatting shared by every CSV cell.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string order_tag(Order o) { return o == Order::second ? "2" : "4"; }

// CSV with '#'-prefixed metadata rows, then a header row, then data.
class Csv {
public:
    explicit Csv(const std::filesystem::path& p) : out_(p) {
        if (!out_)
            throw std::runtime_error("Csv: cannot open " + p.string());
    }
    void meta(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void meta(const std::string& key, double value) { meta(key, num(value)); }
    void meta_params(const ModelParams& p) {
        meta("order", order_tag(p.order));
        meta("lambda", p.lambda);
        meta("eps", p.eps);
        meta("m", num((double)p.m));
    }
    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i)
            out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    void row(const std::vector<double>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << num(cells[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline void write_trajectory(const std::filesystem::path& p, const Trajectory& tr,
                             const ModelParams& mp, int n) {
    Csv c(p);
    c.meta_params(mp);
    c.meta("n", num((double)n));
    if (tr.touchdown_time) {
        c.meta("touchdown_time", *tr.touchdown_time);
        c.meta("touchdown_x", *tr.touchdown_x);
    }
    c.meta("steady", tr.steady ? "1" : "0");
    c.header({"t", "E", "front_left", "front_right", "min_u"});
    for (size_t i = 0; i < tr.times.size(); ++i) {
        const auto& fr = tr.fronts[i];
        c.row({num(tr.times[i]), num(tr.energies[i]),
               fr ? num(fr->first) : std::string(),
               fr ? num(fr->second) : std::string(),
               num(tr.snapshots[i].min())});
    }
}

inline void write_field(const std::filesystem::path& p, const Field& f,
                        const ModelParams& mp) {
    Csv c(p);
    c.meta_params(mp);
    c.meta("n", num((double)f.n()));
    c.header({"x", "u"});
    c.row({-1.0, 0.0});
    for (int i = 0; i < f.n(); ++i) c.row({f.grid.x(i), f.values[i]});
    c.row({1.0, 0.0});
}

// One file per snapshot plus the main trajectory table.
inline void write_snapshots(const std::filesystem::path& dir, const Trajectory& tr,
                            const ModelParams& mp) {
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", i);
        Csv c(dir / name);
        c.meta_params(mp);
        c.meta("t", tr.times[i]);
        c.header({"x", "u"});
        const Field& f = tr.snapshots[i];
        c.row({-1.0, 0.0});
        for (int j = 0; j < f.n(); ++j) c.row({f.grid.x(j), f.values[j]});
        c.row({1.0, 0.0});
    }
}

inline void write_branch(const std::filesystem::path& p, const Branch& b) {
    Csv c(p);
    c.meta("order", order_tag(b.order));
    c.meta("eps", b.eps);
    c.meta("m", num((double)b.m));
    c.meta("truncated", b.truncated ? "1" : "0");
    c.header({"s", "lambda", "min_u"});
    for (const auto& pt : b.points)
        c.row({pt.s, pt.lambda, pt.field.min()});
}

inline void write_length_curve(const std::filesystem::path& p, const LengthCurve& lc) {
    Csv c(p);
    c.meta("eps", lc.eps);
    c.meta("m", num((double)lc.m));
    c.meta("alpha_max", lc.alpha_max);
    if (lc.alpha_min) c.meta("alpha_min", *lc.alpha_min);
    c.header({"alpha", "l", "l_squared"});
    for (size_t i = 0; i < lc.alpha.size(); ++i)
        c.row({lc.alpha[i], lc.l[i], lc.l[i] * lc.l[i]});
}

inline void write_profile(const std::filesystem::path& p, const InnerProfile& pr) {
    Csv c(p);
    c.meta("order", order_tag(pr.order));
    c.meta("lambda", pr.lambda);
    c.meta("m", num((double)pr.m));
    if (pr.order == Order::second) {
        c.meta("gamma", pr.gamma);
    } else {
        c.meta("b0", pr.b0);
        c.meta("c0", pr.c0);
        c.meta("d0", pr.d0);
        c.meta("xi0", pr.xi0);
        c.meta("v_min", pr.v_min);
        c.meta("first_integral_residual", pr.first_integral_residual);
    }
    c.header({"xi", "v"});
    for (size_t i = 0; i < pr.xi.size(); ++i) c.row({pr.xi[i], pr.v[i]});
}

} // namespace mems::io
