#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "rdr/analysis.hpp"
#include "rdr/operators.hpp"

namespace rdr {

enum class StopReason { Tolerance, MaxIter, Divergence };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Tolerance: return "tolerance";
        case StopReason::MaxIter: return "max_iter";
        default: return "divergence";
    }
}

struct StoppingRule {
    double tol = 1e-10; // stop when ||x - x+|| < tol (strict; 0 disables)
    long max_iter = 100000;
    std::optional<double> divergence_bound; // absent: 1e12 (1 + ||x0||)

    void validate() const {
        if (tol < 0.0) throw InvalidParams("StoppingRule: tol must be nonnegative");
        if (max_iter < 1) throw InvalidParams("StoppingRule: max_iter must be >= 1");
        if (divergence_bound && !(*divergence_bound > 0.0))
            throw InvalidParams("StoppingRule: divergence bound must be positive");
    }
};

struct Monitors {
    std::function<double(const Point&)> dist_to_solution; // optional oracle
    int thin_every = 10; // store the full iterate every k-th iteration
};

struct TraceRecord {
    long k;
    double change;
    std::optional<double> gap;
    std::optional<double> dist_A;
    std::optional<double> dist_B;
    std::optional<double> dist_solution;
};

/// Per-iteration record of a Picard run.  Warm-up iterations are excluded
/// from the records; metadata says so.
struct IterationTrace {
    std::vector<TraceRecord> records;
    std::vector<std::pair<long, Point>> thinned_iterates;
    std::optional<Point> final_iterate;
    std::string operator_desc;
    StopReason stop_reason = StopReason::MaxIter;
    double wall_seconds = 0.0;
    int warmup = 0;
    static constexpr bool warmup_excluded = true;

    long iterations() const { return static_cast<long>(records.size()); }
    double final_change() const {
        return records.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : records.back().change;
    }

    std::vector<double> changes() const {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) v.push_back(r.change);
        return v;
    }

    std::vector<double> solution_distances() const {
        std::vector<double> v;
        for (const auto& r : records)
            if (r.dist_solution) v.push_back(*r.dist_solution);
        return v;
    }
};

/// Projection of an iterate onto the inner set: the informative output of
/// the reflector-based methods.
inline Point shadow(const OperatorSpec& op, const Point& x) {
    return project(op.inner_set(), x);
}

/// Infeasibility at the shadow: dist^2 to A plus dist^2 to B.  The second
/// term vanishes by construction and is kept for form.
inline double gap(const OperatorSpec& op, const Point& x) {
    Point s = shadow(op, x);
    const double da = distance(op.outer_set(), s);
    const double db = distance(op.inner_set(), s);
    return da * da + db * db;
}

/// Picard iteration with a DR warm-up on the same pair.  Records every
/// post-warm-up iteration until the rule fires.
inline IterationTrace run(const OperatorSpec& op, const Point& x0, const StoppingRule& rule,
                          const Monitors& monitors = {}, int warmup = 10) {
    rule.validate();
    if (warmup < 0 || warmup > 100) throw InvalidParams("run: warmup in [0, 100]");
    const auto t0 = std::chrono::steady_clock::now();

    const double bound = rule.divergence_bound.value_or(1e12 * (1.0 + x0.norm()));
    const bool with_sets = op.binds_sets();

    IterationTrace trace;
    trace.operator_desc = op.describe();
    trace.warmup = warmup;

    Point x = x0;
    if (warmup > 0) {
        const OperatorSpec dr = op.douglas_rachford_variant();
        for (int i = 0; i < warmup; ++i) x = step(dr, x);
    }

    for (long k = 1; k <= rule.max_iter; ++k) {
        Point next = step(op, x);
        const double change = dist(x, next);

        TraceRecord rec{k, change, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
        if (with_sets) {
            Point s = shadow(op, next);
            const double da = distance(op.outer_set(), s);
            const double db = distance(op.inner_set(), s);
            rec.gap = da * da + db * db;
            rec.dist_A = distance(op.outer_set(), next);
            rec.dist_B = distance(op.inner_set(), next);
        }
        if (monitors.dist_to_solution) rec.dist_solution = monitors.dist_to_solution(next);
        trace.records.push_back(std::move(rec));
        if (monitors.thin_every > 0 && k % monitors.thin_every == 0)
            trace.thinned_iterates.emplace_back(k, next);

        x = next;
        if (change < rule.tol) {
            trace.stop_reason = StopReason::Tolerance;
            break;
        }
        if (x.norm() > bound) {
            trace.stop_reason = StopReason::Divergence;
            break;
        }
        trace.stop_reason = StopReason::MaxIter;
    }

    trace.final_iterate = x;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

// ---------------------------------------------------------------------------
// Trace export: CSV for the per-iteration columns, JSON sidecar for metadata.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw FileError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw FileError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw FileError("rename failed: " + path.string() + ": " + ec.message());
}

inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string trace_to_csv(const IterationTrace& trace) {
    std::string out = "k,change,gap,distA,distB,dist_solution\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? detail::format_full(*v) : std::string{};
    };
    for (const auto& r : trace.records) {
        out += std::to_string(r.k);
        out += ',';
        out += detail::format_full(r.change);
        out += ',';
        out += cell(r.gap);
        out += ',';
        out += cell(r.dist_A);
        out += ',';
        out += cell(r.dist_B);
        out += ',';
        out += cell(r.dist_solution);
        out += '\n';
    }
    return out;
}

inline void save_trace_csv(const IterationTrace& trace, const std::filesystem::path& path) {
    detail::write_atomic(path, trace_to_csv(trace));
}

/// Tail contraction factor of a run: fitted on the distances to the known
/// solution set when the trace has them, on the iterate changes otherwise.
inline RateEstimate estimate_rate(const IterationTrace& trace, double tail_fraction = 0.5) {
    auto d = trace.solution_distances();
    if (!d.empty() && d.size() == trace.records.size())
        return estimate_rate_from_values(d, tail_fraction);
    return estimate_rate_from_values(trace.changes(), tail_fraction);
}

inline nlohmann::json trace_metadata_json(const IterationTrace& trace) {
    return {{"schema", "v1"},
            {"operator", trace.operator_desc},
            {"stop_reason", to_string(trace.stop_reason)},
            {"iterations", trace.iterations()},
            {"final_change", trace.final_change()},
            {"wall_seconds", trace.wall_seconds},
            {"warmup", trace.warmup},
            {"warmup_excluded_from_trace", IterationTrace::warmup_excluded}};
}

inline void save_trace_metadata(const IterationTrace& trace,
                                const std::filesystem::path& path) {
    detail::write_atomic(path, trace_metadata_json(trace).dump(2) + "\n");
}

inline std::vector<TraceRecord> load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open trace: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,change", 0) != 0)
        throw ParseError("trace csv: missing header in " + path.string());
    std::vector<TraceRecord> records;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<std::string, 6> fields;
        std::size_t pos = 0;
        for (int f = 0; f < 6; ++f) {
            const std::size_t next = line.find(',', pos);
            if (next == std::string::npos && f < 5)
                throw ParseError("trace csv line " + std::to_string(lineno) +
                                 ": expected 6 fields");
            fields[static_cast<std::size_t>(f)] =
                line.substr(pos, next == std::string::npos ? next : next - pos);
            pos = (next == std::string::npos) ? line.size() : next + 1;
        }
        auto opt = [&](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        try {
            records.push_back(TraceRecord{std::stol(fields[0]), std::stod(fields[1]),
                                          opt(fields[2]), opt(fields[3]), opt(fields[4]),
                                          opt(fields[5])});
        } catch (const std::exception&) {
            throw ParseError("trace csv line " + std::to_string(lineno) + ": bad number");
        }
    }
    return records;
}

} // namespace rdr
