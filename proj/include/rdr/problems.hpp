#pragma once

#include <nlohmann/json.hpp>

#include "rdr/engine.hpp"
#include "rdr/random.hpp"

namespace rdr {

using json = nlohmann::json;

/// Reproducible feasibility instance: the pair of sets, optional ground
/// truth and solution-set descriptor, and the generator parameters + seed
/// needed to regenerate it.
struct ProblemInstance {
    std::string name;
    SetSpec A;
    SetSpec B;
    std::optional<Point> ground_truth;
    std::optional<SetSpec> solution_set;
    bool consistent = false;
    json params = json::object();

    bool complex_ambient() const { return A.complex_ambient(); }
    Index dim() const { return A.dim(); }
};

// ---------------------------------------------------------------------------
// JSON serialization (schema tag "v1"; matrices row-major, complex as [re, im])
// ---------------------------------------------------------------------------

namespace detail {

inline json point_to_json(const Point& p) {
    json entries = json::array();
    if (p.is_complex()) {
        for (Index i = 0; i < p.dim(); ++i)
            entries.push_back({p.cplx()[i].real(), p.cplx()[i].imag()});
    } else {
        for (Index i = 0; i < p.dim(); ++i) entries.push_back(p.reals()[i]);
    }
    return {{"complex", p.is_complex()}, {"entries", entries}};
}

inline Point point_from_json(const json& j) {
    if (!j.is_object() || !j.contains("complex") || !j.contains("entries"))
        throw ParseError("point: expected {complex, entries}");
    const auto& entries = j.at("entries");
    const Index n = static_cast<Index>(entries.size());
    if (j.at("complex").get<bool>()) {
        CplxVec v(n);
        for (Index i = 0; i < n; ++i) {
            const auto& e = entries.at(static_cast<std::size_t>(i));
            if (!e.is_array() || e.size() != 2)
                throw ParseError("point: complex entry must be [re, im]");
            v[i] = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
        return Point(v);
    }
    RealVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = entries.at(static_cast<std::size_t>(i)).get<double>();
    return Point(v);
}

inline json realvec_to_json(const RealVec& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline RealVec realvec_from_json(const json& j, const char* field) {
    if (!j.is_array()) throw ParseError(std::string("expected array for field ") + field);
    RealVec v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

} // namespace detail

inline json set_to_json(const SetSpec& S) {
    using namespace detail;
    json j{{"type", S.kind_name()}};
    if (S.is<SetSpec::AffineSystem>()) {
        const auto& a = S.as<SetSpec::AffineSystem>();
        const Matrix& M = a.pinv->matrix();
        json rows = json::array();
        for (Index i = 0; i < M.rows(); ++i)
            for (Index c = 0; c < M.cols(); ++c) rows.push_back(M(i, c));
        j["m"] = M.rows();
        j["n"] = M.cols();
        j["M"] = rows; // row-major
        j["b"] = realvec_to_json(a.b);
    } else if (S.is<SetSpec::LineThroughOrigin>()) {
        j["u"] = realvec_to_json(S.as<SetSpec::LineThroughOrigin>().u);
    } else if (S.is<SetSpec::AffineLine>()) {
        j["p"] = realvec_to_json(S.as<SetSpec::AffineLine>().p);
        j["u"] = realvec_to_json(S.as<SetSpec::AffineLine>().u);
    } else if (S.is<SetSpec::Sparsity>()) {
        j["n"] = S.as<SetSpec::Sparsity>().n;
        j["s"] = S.as<SetSpec::Sparsity>().s;
    } else if (S.is<SetSpec::RealSparsity>()) {
        j["n"] = S.as<SetSpec::RealSparsity>().n;
        j["s"] = S.as<SetSpec::RealSparsity>().s;
    } else if (S.is<SetSpec::FourierData>()) {
        const auto& f = S.as<SetSpec::FourierData>();
        j["n"] = f.n;
        j["indices"] = f.indices;
        json vals = json::array();
        for (Index i = 0; i < f.values.size(); ++i)
            vals.push_back({f.values[i].real(), f.values[i].imag()});
        j["values"] = vals;
    } else {
        json pts = json::array();
        for (const auto& p : S.as<SetSpec::PointList>().points)
            pts.push_back(detail::point_to_json(p));
        j["points"] = pts;
    }
    return j;
}

inline SetSpec set_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object() || !j.contains("type")) throw ParseError("set: missing type tag");
    const std::string type = j.at("type").get<std::string>();
    try {
        if (type == "affine_system") {
            const Index m = j.at("m").get<Index>();
            const Index n = j.at("n").get<Index>();
            const auto& rows = j.at("M");
            if (static_cast<Index>(rows.size()) != m * n)
                throw ParseError("affine_system: M has wrong length");
            Matrix M(m, n);
            for (Index i = 0; i < m; ++i)
                for (Index c = 0; c < n; ++c)
                    M(i, c) = rows.at(static_cast<std::size_t>(i * n + c)).get<double>();
            return SetSpec::affine_system(M, realvec_from_json(j.at("b"), "b"));
        }
        if (type == "line_through_origin")
            return SetSpec::line_through_origin(realvec_from_json(j.at("u"), "u"));
        if (type == "affine_line")
            return SetSpec::affine_line(realvec_from_json(j.at("p"), "p"),
                                        realvec_from_json(j.at("u"), "u"));
        if (type == "sparsity")
            return SetSpec::sparsity(j.at("n").get<Index>(), j.at("s").get<Index>());
        if (type == "real_sparsity")
            return SetSpec::real_sparsity(j.at("n").get<Index>(), j.at("s").get<Index>());
        if (type == "fourier_data") {
            const auto idx = j.at("indices").get<std::vector<Index>>();
            const auto& vals = j.at("values");
            CplxVec v(static_cast<Index>(vals.size()));
            for (Index i = 0; i < v.size(); ++i) {
                const auto& e = vals.at(static_cast<std::size_t>(i));
                v[i] = Complex(e.at(0).get<double>(), e.at(1).get<double>());
            }
            return SetSpec::fourier_data(j.at("n").get<Index>(), idx, v);
        }
        if (type == "point_list") {
            std::vector<Point> pts;
            for (const auto& pj : j.at("points")) pts.push_back(point_from_json(pj));
            return SetSpec::point_list(std::move(pts));
        }
    } catch (const json::exception& e) {
        throw ParseError("set (" + type + "): " + e.what());
    }
    throw ParseError("set: unknown type '" + type + "'");
}

inline json instance_to_json(const ProblemInstance& inst) {
    json j{{"schema", "v1"},
           {"name", inst.name},
           {"consistent", inst.consistent},
           {"params", inst.params},
           {"A", set_to_json(inst.A)},
           {"B", set_to_json(inst.B)}};
    if (inst.ground_truth) j["ground_truth"] = detail::point_to_json(*inst.ground_truth);
    if (inst.solution_set) j["solution_set"] = set_to_json(*inst.solution_set);
    return j;
}

inline ProblemInstance instance_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("instance: expected a JSON object");
    if (!j.contains("schema")) throw ParseError("instance: missing schema tag");
    const std::string schema = j.at("schema").get<std::string>();
    if (schema != "v1")
        throw VersionMismatch("instance: schema '" + schema + "' not supported (want v1)");
    try {
        ProblemInstance inst{j.at("name").get<std::string>(),
                             set_from_json(j.at("A")),
                             set_from_json(j.at("B")),
                             std::nullopt,
                             std::nullopt,
                             j.at("consistent").get<bool>(),
                             j.value("params", json::object())};
        if (j.contains("ground_truth"))
            inst.ground_truth = detail::point_from_json(j.at("ground_truth"));
        if (j.contains("solution_set")) inst.solution_set = set_from_json(j.at("solution_set"));
        return inst;
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance: ") + e.what());
    }
}

inline void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
    detail::write_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

inline ProblemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open instance: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("instance json at " + path.string() + ": " + e.what());
    }
    return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Sparse-affine feasibility: A = {||x||_0 <= s}, B = {Mx = b} with Gaussian
/// M, planted k_true-sparse ground truth, b = M xbar (+ optional Gaussian
/// noise on b).  Consistent iff s >= k_true and no noise.
inline ProblemInstance gen_sparse_affine(Index n, Index m, Index k_true, Index s,
                                         std::uint64_t seed,
                                         std::optional<double> noise_sigma = std::nullopt) {
    if (!(m >= 1 && m < n)) throw InvalidShape("gen_sparse_affine: need 1 <= m < n");
    if (k_true < 1 || k_true > n) throw InvalidShape("gen_sparse_affine: need 1 <= k_true <= n");
    if (s < 1 || s > n) throw InvalidShape("gen_sparse_affine: need 1 <= s <= n");
    if (noise_sigma && !(*noise_sigma > 0.0))
        throw InvalidShape("gen_sparse_affine: noise sigma must be positive");

    RealVec flat = gaussian_vec(m * n, derive_seed(seed, 0));
    Matrix M(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index c = 0; c < n; ++c) M(i, c) = flat[i * n + c];

    auto support = support_pattern(n, k_true, derive_seed(seed, 1));
    RealVec mags = gaussian_vec(k_true, derive_seed(seed, 2));
    RealVec xbar = RealVec::Zero(n);
    for (Index i = 0; i < k_true; ++i) xbar[support[static_cast<std::size_t>(i)]] = mags[i];

    RealVec b = M * xbar;
    if (noise_sigma) b += *noise_sigma * gaussian_vec(m, derive_seed(seed, 3));

    ProblemInstance inst{"sparse_affine", SetSpec::sparsity(n, s),
                         SetSpec::affine_system(M, b), Point(xbar), std::nullopt,
                         !noise_sigma && s >= k_true};
    inst.params = {{"kind", "sparse_affine"}, {"n", n},       {"m", m},
                   {"k_true", k_true},        {"s", s},       {"seed", seed},
                   {"noise_sigma", noise_sigma ? json(*noise_sigma) : json(nullptr)}};
    return inst;
}

/// Sparse-Fourier feasibility: A = real s-sparse vectors inside C^n,
/// B = {x : F(x)(k) = b(k) on J}.  J is a seeded uniform draw completed to
/// conjugate symmetry; optional Poisson noise replaces each |b_k| by a
/// Poisson draw with that mean, phase kept and mirrored conjugately.
inline ProblemInstance gen_sparse_fourier(Index n, double sample_fraction, Index k_true,
                                          Index s, std::uint64_t seed, bool poisson_noise = false) {
    if (n < 4) throw InvalidShape("gen_sparse_fourier: need n >= 4");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
        throw InvalidShape("gen_sparse_fourier: sample fraction in (0,1]");
    if (k_true < 1 || k_true > n) throw InvalidShape("gen_sparse_fourier: need 1 <= k_true <= n");
    if (s < 1 || s > n) throw InvalidShape("gen_sparse_fourier: need 1 <= s <= n");

    auto support = support_pattern(n, k_true, derive_seed(seed, 1));
    RealVec mags = gaussian_vec(k_true, derive_seed(seed, 2));
    RealVec xbar = RealVec::Zero(n);
    for (Index i = 0; i < k_true; ++i) xbar[support[static_cast<std::size_t>(i)]] = mags[i];
    Point truth = Point(xbar).to_complex();

    CplxVec spectrum = dft(truth.cplx(), DftDirection::Forward);

    const Index target = std::max<Index>(1, static_cast<Index>(std::llround(
                                                sample_fraction * static_cast<double>(n))));
    auto drawn = support_pattern(n, target, derive_seed(seed, 3));
    std::vector<Index> J;
    for (Index k : drawn) {
        J.push_back(k);
        J.push_back((n - k) % n); // conjugate partner keeps real signals representable
    }
    std::sort(J.begin(), J.end());
    J.erase(std::unique(J.begin(), J.end()), J.end());

    CplxVec bJ(static_cast<Index>(J.size()));
    for (std::size_t i = 0; i < J.size(); ++i) bJ[static_cast<Index>(i)] = spectrum[J[i]];

    if (poisson_noise) {
        std::mt19937_64 gen(derive_seed(seed, 4));
        for (std::size_t i = 0; i < J.size(); ++i) {
            const Index k = J[i];
            const Index partner = (n - k) % n;
            if (partner < k) continue; // handled at the representative index
            const double mean = std::abs(bJ[static_cast<Index>(i)]);
            std::poisson_distribution<long> pois(std::max(mean, 1e-12));
            const double mag = static_cast<double>(pois(gen));
            const Complex phase =
                mean > 0 ? bJ[static_cast<Index>(i)] / mean : Complex(1.0, 0.0);
            bJ[static_cast<Index>(i)] = mag * phase;
            if (partner != k) {
                const auto it = std::lower_bound(J.begin(), J.end(), partner);
                bJ[static_cast<Index>(it - J.begin())] = std::conj(mag * phase);
            }
        }
    }

    ProblemInstance inst{"sparse_fourier",
                         SetSpec::real_sparsity(n, s),
                         SetSpec::fourier_data(n, J, bJ),
                         truth,
                         std::nullopt,
                         !poisson_noise && s >= k_true};
    inst.params = {{"kind", "sparse_fourier"},
                   {"n", n},
                   {"sample_fraction", sample_fraction},
                   {"k_true", k_true},
                   {"s", s},
                   {"seed", seed},
                   {"poisson_noise", poisson_noise},
                   {"sampling", "uniform support with conjugate-symmetric completion"},
                   {"noise_model", "poisson on magnitudes, phase kept, conjugate-mirrored"}};
    return inst;
}

enum class GeometryKind { LinesAtAngle, ParallelLines, OrthogonalAxes };

/// Controlled-angle synthetic geometry in R^dim.
inline ProblemInstance gen_geometry(GeometryKind kind, double param = 0.0, Index dim = 2) {
    if (dim < 2) throw InvalidShape("gen_geometry: need dim >= 2");
    auto axis = [dim](Index i) {
        RealVec u = RealVec::Zero(dim);
        u[i] = 1.0;
        return u;
    };
    switch (kind) {
        case GeometryKind::LinesAtAngle: {
            if (!(param > 0.0 && param <= std::numbers::pi / 2.0))
                throw InvalidShape("gen_geometry: angle in (0, pi/2]");
            RealVec u = RealVec::Zero(dim);
            u[0] = std::cos(param);
            u[1] = std::sin(param);
            ProblemInstance inst{"lines_at_angle",
                                 SetSpec::line_through_origin(axis(0)),
                                 SetSpec::line_through_origin(u),
                                 Point::zeros(dim),
                                 SetSpec::point_list({Point::zeros(dim)}),
                                 true};
            inst.params = {{"kind", "lines_at_angle"}, {"angle_rad", param}, {"dim", dim}};
            return inst;
        }
        case GeometryKind::ParallelLines: {
            if (param == 0.0) throw InvalidShape("gen_geometry: offset must be nonzero");
            RealVec p = RealVec::Zero(dim);
            p[1] = param;
            ProblemInstance inst{"parallel_lines",
                                 SetSpec::affine_line(RealVec(RealVec::Zero(dim)), axis(0)),
                                 SetSpec::affine_line(p, axis(0)),
                                 std::nullopt,
                                 std::nullopt,
                                 false};
            inst.params = {{"kind", "parallel_lines"}, {"offset", param}, {"dim", dim}};
            return inst;
        }
        default: {
            ProblemInstance inst{"orthogonal_axes",
                                 SetSpec::line_through_origin(axis(0)),
                                 SetSpec::line_through_origin(axis(1)),
                                 Point::zeros(dim),
                                 SetSpec::point_list({Point::zeros(dim)}),
                                 true};
            inst.params = {{"kind", "orthogonal_axes"}, {"dim", dim}};
            return inst;
        }
    }
}

/// Distance oracle from the instance's solution descriptor, when present.
inline std::function<double(const Point&)> solution_distance_oracle(const ProblemInstance& inst) {
    if (!inst.solution_set) return {};
    SetSpec sol = *inst.solution_set;
    return [sol](const Point& x) { return distance(sol, x); };
}

} // namespace rdr
