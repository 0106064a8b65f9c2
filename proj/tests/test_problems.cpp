#include <catch2/catch_amalgamated.hpp>

#include "rdr/problems.hpp"

using namespace rdr;
using Catch::Matchers::WithinAbs;

namespace {

// all size-s supports of [0, n)
std::vector<std::vector<Index>> all_supports(Index n, Index s) {
    std::vector<std::vector<Index>> out;
    std::vector<Index> comb(static_cast<std::size_t>(s));
    std::iota(comb.begin(), comb.end(), Index{0});
    while (true) {
        out.push_back(comb);
        Index i = s - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - s + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < s; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

// does an at-most-s-sparse solution of Mx = b exist? exhaustive over supports
bool sparse_solution_exists(const Matrix& M, const RealVec& b, Index s) {
    for (const auto& T : all_supports(M.cols(), s)) {
        Matrix MT(M.rows(), s);
        for (Index j = 0; j < s; ++j) MT.col(j) = M.col(T[static_cast<std::size_t>(j)]);
        RealVec z = MT.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
        if ((MT * z - b).norm() < 1e-8 * (1.0 + b.norm())) return true;
    }
    return false;
}

} // namespace

TEST_CASE("sparse affine generator builds a consistent planted instance") {
    auto inst = gen_sparse_affine(256, 64, 8, 10, 1);
    REQUIRE(inst.consistent);
    REQUIRE(inst.ground_truth.has_value());
    REQUIRE(inst.ground_truth->count_nonzeros() == 8);

    const auto& aff = inst.B.as<SetSpec::AffineSystem>();
    REQUIRE((aff.pinv->matrix() * inst.ground_truth->reals() - aff.b).norm() < 1e-12);
    REQUIRE(distance(inst.A, *inst.ground_truth) + distance(inst.B, *inst.ground_truth) <=
            1e-9);

    auto tight = gen_sparse_affine(256, 64, 8, 6, 1);
    REQUIRE_FALSE(tight.consistent);

    auto noisy = gen_sparse_affine(64, 16, 4, 6, 1, 0.1);
    REQUIRE_FALSE(noisy.consistent);
    const auto& naff = noisy.B.as<SetSpec::AffineSystem>();
    REQUIRE((naff.pinv->matrix() * noisy.ground_truth->reals() - naff.b).norm() > 1e-6);
}

TEST_CASE("desk-scale instance is solved by exhaustive support search") {
    auto inst = gen_sparse_affine(8, 4, 2, 2, 3);
    const auto& aff = inst.B.as<SetSpec::AffineSystem>();
    const Matrix& M = aff.pinv->matrix();
    const RealVec& b = aff.b;
    const RealVec& xbar = inst.ground_truth->reals();

    int feasible_supports = 0;
    RealVec recovered;
    for (const auto& T : all_supports(8, 2)) {
        Matrix MT(4, 2);
        for (Index j = 0; j < 2; ++j) MT.col(j) = M.col(T[static_cast<std::size_t>(j)]);
        RealVec z = MT.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
        if ((MT * z - b).norm() < 1e-8 * (1.0 + b.norm())) {
            ++feasible_supports;
            recovered = RealVec::Zero(8);
            for (Index j = 0; j < 2; ++j) recovered[T[static_cast<std::size_t>(j)]] = z[j];
        }
    }
    REQUIRE(feasible_supports == 1);
    REQUIRE((recovered - xbar).norm() < 1e-8);
}

TEST_CASE("generator consistency flag agrees with the exhaustive oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        for (Index s : {1, 2, 3}) {
            auto inst = gen_sparse_affine(10, 5, 2, s, seed);
            const auto& aff = inst.B.as<SetSpec::AffineSystem>();
            REQUIRE(inst.consistent ==
                    sparse_solution_exists(aff.pinv->matrix(), aff.b, s));
        }
    }
}

TEST_CASE("sparse affine generator validates shapes") {
    REQUIRE_THROWS_AS(gen_sparse_affine(8, 8, 2, 2, 1), InvalidShape);
    REQUIRE_THROWS_AS(gen_sparse_affine(8, 4, 0, 2, 1), InvalidShape);
    REQUIRE_THROWS_AS(gen_sparse_affine(8, 4, 2, 9, 1), InvalidShape);
    REQUIRE_THROWS_AS(gen_sparse_affine(8, 4, 2, 2, 1, -0.5), InvalidShape);
}

TEST_CASE("sparse fourier generator: consistency and symmetric sampling") {
    auto inst = gen_sparse_fourier(64, 0.125, 4, 5, 2);
    REQUIRE(inst.consistent);
    REQUIRE(inst.complex_ambient());
    REQUIRE(distance(inst.A, *inst.ground_truth) + distance(inst.B, *inst.ground_truth) <=
            1e-9);

    const auto& fd = inst.B.as<SetSpec::FourierData>();
    for (Index k : fd.indices) {
        const Index partner = (64 - k) % 64;
        REQUIRE(std::binary_search(fd.indices.begin(), fd.indices.end(), partner));
    }
}

TEST_CASE("full measurements with s = n recover the truth in one AP step") {
    auto inst = gen_sparse_fourier(16, 1.0, 3, 16, 5);
    auto op = OperatorSpec::t_lambda(inst.A, inst.B, 0.0);
    Point x0 = gaussian_cplx_point(16, 99);
    Point one_step = step(op, x0);
    REQUIRE(dist(one_step, *inst.ground_truth) < 1e-9);
}

TEST_CASE("poisson noise flips the consistency flag") {
    auto noisy = gen_sparse_fourier(32, 0.25, 3, 4, 7, true);
    REQUIRE_FALSE(noisy.consistent);
    // data stays conjugate symmetric so real iterates remain meaningful
    const auto& fd = noisy.B.as<SetSpec::FourierData>();
    for (std::size_t i = 0; i < fd.indices.size(); ++i) {
        const Index k = fd.indices[i];
        const Index partner = (32 - k) % 32;
        const auto it = std::lower_bound(fd.indices.begin(), fd.indices.end(), partner);
        const Complex paired = fd.values[static_cast<Index>(it - fd.indices.begin())];
        REQUIRE(std::abs(paired - std::conj(fd.values[static_cast<Index>(i)])) < 1e-12);
    }
}

TEST_CASE("geometry instances expose their angle data") {
    auto sixty = gen_geometry(GeometryKind::LinesAtAngle, std::numbers::pi / 3.0);
    REQUIRE_THAT(friedrichs_cosine(sixty.A, sixty.B), WithinAbs(0.5, 1e-12));
    REQUIRE(sixty.consistent);
    REQUIRE(distance(*sixty.solution_set, Point::zeros(2)) < 1e-12);

    auto ortho = gen_geometry(GeometryKind::OrthogonalAxes);
    REQUIRE_THAT(friedrichs_cosine(ortho.A, ortho.B), WithinAbs(0.0, 1e-12));

    auto par = gen_geometry(GeometryKind::ParallelLines, 1.0);
    Point g = estimate_gap_vector(par.A, par.B, 100000, 1);
    REQUIRE_THAT(g.reals()[0], WithinAbs(0.0, 1e-8));
    REQUIRE_THAT(g.reals()[1], WithinAbs(1.0, 1e-8));

    REQUIRE_THROWS_AS(gen_geometry(GeometryKind::ParallelLines, 0.0), InvalidShape);
    REQUIRE_THROWS_AS(gen_geometry(GeometryKind::LinesAtAngle, 2.0), InvalidShape);
}

TEST_CASE("instances round-trip through json exactly") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path();

    for (auto inst : {gen_sparse_affine(16, 5, 3, 4, 11), gen_sparse_fourier(16, 0.25, 2, 3, 13),
                      gen_geometry(GeometryKind::OrthogonalAxes)}) {
        auto path = dir / ("rdr_inst_" + inst.name + ".json");
        save_instance(inst, path);
        auto back = load_instance(path);
        REQUIRE(instance_to_json(back) == instance_to_json(inst));
        REQUIRE(back.consistent == inst.consistent);
        if (inst.ground_truth) REQUIRE(*back.ground_truth == *inst.ground_truth);
        fs::remove(path);
    }

    // bitwise determinism of the generator itself
    REQUIRE(instance_to_json(gen_sparse_affine(32, 8, 3, 4, 21)) ==
            instance_to_json(gen_sparse_affine(32, 8, 3, 4, 21)));
    REQUIRE_FALSE(instance_to_json(gen_sparse_affine(32, 8, 3, 4, 21)) ==
                  instance_to_json(gen_sparse_affine(32, 8, 3, 4, 22)));
}

TEST_CASE("instance loader reports parse and version problems") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path();

    auto truncated = dir / "rdr_truncated.json";
    {
        std::ofstream out(truncated);
        out << R"({"schema": "v1", "name": "oops")";
    }
    REQUIRE_THROWS_AS(load_instance(truncated), ParseError);
    fs::remove(truncated);

    auto wrong = dir / "rdr_v0.json";
    {
        std::ofstream out(wrong);
        out << R"({"schema": "v0", "name": "old"})";
    }
    REQUIRE_THROWS_AS(load_instance(wrong), VersionMismatch);
    fs::remove(wrong);

    auto missing_field = dir / "rdr_missing.json";
    {
        std::ofstream out(missing_field);
        out << R"({"schema": "v1", "name": "x", "consistent": true, "A": {"type": "sparsity", "n": 4, "s": 1}})";
    }
    REQUIRE_THROWS_AS(load_instance(missing_field), ParseError);
    fs::remove(missing_field);

    REQUIRE_THROWS_AS(load_instance(dir / "rdr_does_not_exist.json"), FileError);
}
