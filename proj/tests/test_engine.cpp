#include <catch2/catch_amalgamated.hpp>

#include "rdr/engine.hpp"
#include "rdr/random.hpp"

using namespace rdr;
using Catch::Matchers::WithinAbs;

namespace {

RealVec rv(std::initializer_list<double> xs) {
    RealVec v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

SetSpec x_axis() { return SetSpec::line_through_origin(rv({1.0, 0.0})); }
SetSpec y_axis() { return SetSpec::line_through_origin(rv({0.0, 1.0})); }
SetSpec horizontal(double offset) {
    return SetSpec::affine_line(rv({0.0, offset}), rv({1.0, 0.0}));
}

} // namespace

TEST_CASE("alternating projections on orthogonal axes stops at k=2") {
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.0);
    auto trace = run(op, Point(rv({1.0, 1.0})), {.tol = 1e-10, .max_iter = 100}, {}, 0);
    REQUIRE(trace.iterations() == 2);
    REQUIRE(trace.stop_reason == StopReason::Tolerance);
    REQUIRE_THAT(trace.records[0].change, WithinAbs(std::sqrt(2.0), 1e-14));
    REQUIRE_THAT(trace.records[1].change, WithinAbs(0.0, 1e-14));
    REQUIRE(trace.final_iterate->norm() < 1e-14);
}

TEST_CASE("fixed starting point stops immediately on parallel lines") {
    auto op = OperatorSpec::t_lambda(horizontal(0.0), horizontal(1.0), 0.5);
    auto trace = run(op, Point(rv({0.0, -1.0})), {.tol = 1e-10, .max_iter = 100}, {}, 0);
    REQUIRE(trace.iterations() == 1);
    REQUIRE(trace.stop_reason == StopReason::Tolerance);
    REQUIRE_THAT(trace.records[0].change, WithinAbs(0.0, 1e-14));
}

TEST_CASE("max_iter is enforced exactly with tol zero") {
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.5);
    auto trace = run(op, Point(rv({1.0, 1.0})), {.tol = 0.0, .max_iter = 5}, {}, 0);
    REQUIRE(trace.iterations() == 5);
    REQUIRE(trace.stop_reason == StopReason::MaxIter);
    for (long k = 0; k < 5; ++k) REQUIRE(trace.records[static_cast<std::size_t>(k)].k == k + 1);
}

TEST_CASE("divergence stop on inconsistent DR with a small bound") {
    // DR on parallel lines drifts by -g every step
    auto op = OperatorSpec::t_lambda(horizontal(0.0), horizontal(1.0), 1.0);
    auto trace = run(op, Point(rv({0.0, 0.0})),
                     {.tol = 1e-10, .max_iter = 1000, .divergence_bound = 5.0}, {}, 0);
    REQUIRE(trace.stop_reason == StopReason::Divergence);
    REQUIRE(trace.iterations() < 20);
}

TEST_CASE("shadow and gap hand cases") {
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.5);
    Point x(rv({1.0, 1.0}));
    Point s = shadow(op, x);
    REQUIRE(s.reals() == rv({0.0, 1.0}));
    REQUIRE_THAT(gap(op, x), WithinAbs(1.0, 1e-14));

    Point on_b(rv({0.0, 3.0}));
    REQUIRE(shadow(op, on_b) == on_b);

    auto par = OperatorSpec::t_lambda(horizontal(0.0), horizontal(1.0), 0.5);
    Point p(rv({0.0, -1.0}));
    REQUIRE(shadow(par, p).reals() == rv({0.0, 1.0}));
    REQUIRE_THAT(gap(par, Point(rv({3.0, 7.0}))), WithinAbs(1.0, 1e-14));

    Point origin(rv({0.0, 0.0}));
    REQUIRE_THAT(gap(op, origin), WithinAbs(0.0, 1e-14));
}

TEST_CASE("warm-up runs DR iterations before the recorded segment") {
    // With warmup=0 and lambda=0, the first recorded change from (1,1) is sqrt(2).
    // After one DR warm-up step from (1,1) the state is already (0,0).
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.0);
    auto warm = run(op, Point(rv({1.0, 1.0})), {.tol = 1e-10, .max_iter = 100}, {}, 1);
    REQUIRE(warm.iterations() == 1);
    REQUIRE_THAT(warm.records[0].change, WithinAbs(0.0, 1e-14));
    REQUIRE(warm.warmup == 1);
}

TEST_CASE("solution distance is monotone on convex consistent instances") {
    SetSpec A = x_axis();
    SetSpec B = SetSpec::line_through_origin(rv({std::cos(1.0), std::sin(1.0)}));
    Monitors mon;
    mon.dist_to_solution = [](const Point& p) { return p.norm(); };
    for (double lam : {0.0, 0.5, 1.0}) {
        auto op = OperatorSpec::t_lambda(A, B, lam);
        auto trace = run(op, gaussian_point(2, 9), {.tol = 1e-12, .max_iter = 500}, mon, 10);
        auto d = trace.solution_distances();
        REQUIRE(d.size() >= 5);
        for (std::size_t i = 1; i < d.size(); ++i) REQUIRE(d[i] <= d[i - 1] + 1e-10);
    }
}

TEST_CASE("traces are deterministic") {
    auto op = OperatorSpec::t_lambda(x_axis(),
                                     SetSpec::line_through_origin(rv({1.0, 0.5})), 0.45);
    Point x0 = gaussian_point(2, 17);
    auto a = run(op, x0, {.tol = 1e-10, .max_iter = 200}, {}, 10);
    auto b = run(op, x0, {.tol = 1e-10, .max_iter = 200}, {}, 10);
    REQUIRE(a.iterations() == b.iterations());
    for (long k = 0; k < a.iterations(); ++k) {
        const auto& ra = a.records[static_cast<std::size_t>(k)];
        const auto& rb = b.records[static_cast<std::size_t>(k)];
        REQUIRE(ra.change == rb.change);
        REQUIRE(*ra.gap == *rb.gap);
    }
    REQUIRE(*a.final_iterate == *b.final_iterate);
}

TEST_CASE("stop reason tolerance iff final change under tolerance") {
    auto op = OperatorSpec::t_lambda(x_axis(),
                                     SetSpec::line_through_origin(rv({1.0, 2.0})), 0.3);
    auto tol_stop = run(op, gaussian_point(2, 4), {.tol = 1e-8, .max_iter = 100000}, {}, 0);
    REQUIRE(tol_stop.stop_reason == StopReason::Tolerance);
    REQUIRE(tol_stop.final_change() < 1e-8);

    auto iter_stop = run(op, gaussian_point(2, 4), {.tol = 1e-8, .max_iter = 3}, {}, 0);
    REQUIRE(iter_stop.stop_reason == StopReason::MaxIter);
    REQUIRE(iter_stop.final_change() >= 1e-8);
}

TEST_CASE("iterate thinning stores every tenth iterate by default") {
    auto op = OperatorSpec::t_lambda(x_axis(),
                                     SetSpec::line_through_origin(rv({1.0, 0.2})), 0.5);
    auto trace = run(op, gaussian_point(2, 3), {.tol = 0.0, .max_iter = 35}, {}, 0);
    REQUIRE(trace.thinned_iterates.size() == 3);
    REQUIRE(trace.thinned_iterates[0].first == 10);
    REQUIRE(trace.thinned_iterates[2].first == 30);
}

TEST_CASE("trace csv round-trips") {
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.5);
    Monitors mon;
    mon.dist_to_solution = [](const Point& p) { return p.norm(); };
    auto trace = run(op, Point(rv({1.0, 1.0})), {.tol = 0.0, .max_iter = 4}, mon, 0);

    auto path = std::filesystem::temp_directory_path() / "rdr_trace_test.csv";
    save_trace_csv(trace, path);
    auto records = load_trace_csv(path);
    REQUIRE(records.size() == trace.records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        REQUIRE(records[i].k == trace.records[i].k);
        REQUIRE(records[i].change == trace.records[i].change);
        REQUIRE(records[i].gap.has_value());
        REQUIRE(*records[i].gap == *trace.records[i].gap);
        REQUIRE(*records[i].dist_solution == *trace.records[i].dist_solution);
    }
    std::filesystem::remove(path);

    REQUIRE_THROWS_AS(load_trace_csv("/nonexistent/rdr.csv"), FileError);

    auto bad = std::filesystem::temp_directory_path() / "rdr_bad_trace.csv";
    {
        std::ofstream out(bad);
        out << "not,a,trace,header\n";
    }
    REQUIRE_THROWS_AS(load_trace_csv(bad), ParseError);
    {
        std::ofstream out(bad);
        out << "k,change,gap,distA,distB,dist_solution\n1,oops,,,,\n";
    }
    REQUIRE_THROWS_AS(load_trace_csv(bad), ParseError);
    std::filesystem::remove(bad);
}

TEST_CASE("trace rate estimate prefers solution distances") {
    SetSpec A = x_axis();
    SetSpec B = SetSpec::line_through_origin(rv({std::cos(0.9), std::sin(0.9)}));
    Monitors mon;
    mon.dist_to_solution = [](const Point& p) { return p.norm(); };
    auto op = OperatorSpec::t_lambda(A, B, 0.0);
    auto trace = run(op, gaussian_point(2, 12), {.tol = 1e-13, .max_iter = 2000}, mon, 0);
    const double expected = std::pow(std::cos(0.9), 2.0);
    REQUIRE_THAT(estimate_rate(trace).factor, WithinAbs(expected, 0.05 * expected));

    auto bare = run(op, gaussian_point(2, 12), {.tol = 1e-13, .max_iter = 2000}, {}, 0);
    REQUIRE_THAT(estimate_rate(bare).factor, WithinAbs(expected, 0.05 * expected));
}

TEST_CASE("trace metadata sidecar") {
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.5);
    auto trace = run(op, Point(rv({1.0, 1.0})), {.tol = 1e-10, .max_iter = 50}, {}, 3);
    auto meta = trace_metadata_json(trace);
    REQUIRE(meta.at("stop_reason") == "tolerance");
    REQUIRE(meta.at("warmup") == 3);
    REQUIRE(meta.at("warmup_excluded_from_trace") == true);

    auto path = std::filesystem::temp_directory_path() / "rdr_meta_test.json";
    save_trace_metadata(trace, path);
    std::ifstream in(path);
    auto back = nlohmann::json::parse(in);
    REQUIRE(back == meta);
    std::filesystem::remove(path);
}

TEST_CASE("prox operator runs record no set distances") {
    auto op = OperatorSpec::prox_t_lambda(ProxTerm::l1_norm(0.1),
                                          ProxTerm::indicator(x_axis()), 1.0);
    auto trace = run(op, Point(rv({2.0, 1.0})), {.tol = 1e-12, .max_iter = 200}, {}, 0);
    REQUIRE(trace.stop_reason == StopReason::Tolerance);
    REQUIRE_FALSE(trace.records.front().gap.has_value());
    // the prox-DR fixed point shadows to the l1 prox of the x-axis projection
    REQUIRE(trace.final_iterate.has_value());
}

TEST_CASE("stopping rule validation") {
    StoppingRule bad_tol{.tol = -1.0};
    REQUIRE_THROWS_AS(bad_tol.validate(), InvalidParams);
    StoppingRule bad_iter{.tol = 1e-10, .max_iter = 0};
    REQUIRE_THROWS_AS(bad_iter.validate(), InvalidParams);
    auto op = OperatorSpec::t_lambda(x_axis(), y_axis(), 0.0);
    REQUIRE_THROWS_AS(run(op, Point(rv({1.0, 1.0})), {}, {}, -1), InvalidParams);
    REQUIRE_THROWS_AS(run(op, Point(rv({1.0, 1.0})), {}, {}, 101), InvalidParams);
}
