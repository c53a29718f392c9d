// Command-line front end: one subcommand per experiment kind. Each
// subcommand reads a run specification file, applies flag overrides, and
// executes the pipeline; --verify runs the subcommand's built-in oracle
// battery instead of the experiment.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "shapelab/experiment.hpp"

namespace {

using namespace shapelab;

constexpr int kExitOk = 0;
constexpr int kExitSpecInvalid = 2;
constexpr int kExitConditionViolated = 3;
constexpr int kExitResource = 4;

struct cli_options {
    std::string spec_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::uint64_t replicas = 0;
    bool replicas_set = false;
    std::uint64_t workers = 0;
    bool workers_set = false;
    bool verify = false;
};

void check(bool ok, const char* what) {
    if (ok) {
        std::cout << "  ok: " << what << "\n";
    } else {
        std::cout << "  FAILED: " << what << "\n";
        throw error(std::string("verify failed: ") + what);
    }
}

sim_config small_config(std::uint64_t seed) {
    sim_config c;
    c.dimension = 2;
    c.intensity = 1.0;
    c.radius = 1.5;
    c.box_side = 24.0;
    c.master_seed = seed;
    return c;
}

void verify_sample() {
    const auto a = sample_ppp(small_config(7));
    const auto b = sample_ppp(small_config(7));
    check(a == b, "fixed seed gives identical point sets");
    sim_config zero = small_config(7);
    zero.box_side = 0.0;
    check(sample_ppp(zero).count() == 0, "zero-volume box yields the empty set");
    const auto scaled = rescale_intensity(a, 1.0);
    check(scaled == a, "unit-intensity rescale is the identity");
}

void verify_build() {
    const auto g = geo_graph(sample_ppp(small_config(11)), 1.5);
    std::size_t oracle_edges = 0;
    for (std::size_t i = 0; i < g.vertex_count(); ++i)
        for (std::size_t j = i + 1; j < g.vertex_count(); ++j) {
            const double d = distance(g.points().point(i), g.points().point(j));
            if (d > 0.0 && d < 1.5) ++oracle_edges;
        }
    check(oracle_edges == g.edge_count(), "cell-indexed edges equal the all-pairs oracle");
    std::size_t sum = 0;
    for (auto s : g.component_sizes()) sum += s;
    check(sum == g.vertex_count(), "component sizes partition the vertices");
}

void verify_fpp() {
    const auto g = geo_graph(sample_ppp(small_config(13)), 1.5);
    const auto field = assign_weights(g, weight_distribution::exponential(1.0), 99);
    std::vector<double> origin(2, 0.0);
    const auto root = g.nearest_vertex(origin, true);
    const auto fp = first_passage(field, root, true);
    check(fp.time[root] == 0.0, "source time is zero");
    bool triangle = true;
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [u, v] = edges[e];
        if (fp.reached(u) && fp.time[v] > fp.time[u] + field.weights[e] + 1e-12) triangle = false;
        if (fp.reached(v) && fp.time[u] > fp.time[v] + field.weights[e] + 1e-12) triangle = false;
    }
    check(triangle, "edge relaxation fixed point");
}

void verify_compete() {
    const auto g = geo_graph(sample_ppp(small_config(17)), 2.0);
    competition_state state(g, {{0.0, 0.0}}, {}, overlap_rule::red_wins);
    counter_rng rng(derive_stream(5, "verify", 0));
    state.run(2.0, 1'000'000, rng, 100);
    state.audit_caches();
    check(state.count(occupancy::blue) == 0, "no blue sites without blue seeds");
    check(state.count(occupancy::red) >= 1, "red growth from one seed");
}

void verify_cayley() {
    const heisenberg_element X{1, 0, 0}, Y{0, 1, 0};
    check(multiply(X, Y) == heisenberg_element{1, 1, 1}, "group law on the generators");
    check(inverse(heisenberg_element{1, 1, 0}) == heisenberg_element{-1, -1, 1}, "inverse rule");
    check(power(heisenberg_element{1, 1, 0}, 3) == heisenberg_element{3, 3, 3}, "cube by closed form");
    const word_ball ball(1);
    check(ball.size() == 5, "radius-1 ball holds identity plus four generators");
}

void verify_common() {
    check(derive_stream(1, "a", 0) != derive_stream(1, "b", 0), "labels split streams");
    check(derive_stream(1, "a", 0) != derive_stream(1, "a", 1), "replicas split streams");
}

int run_verify(const std::string& kind) {
    std::cout << "verify " << kind << ":\n";
    verify_common();
    if (kind == "sample") verify_sample();
    if (kind == "build" || kind == "fpp-shape" || kind == "straightness" || kind == "geodesics")
        verify_build();
    if (kind == "fpp-shape" || kind == "time-constant" || kind == "deviations" || kind == "coupling" ||
        kind == "geodesics" || kind == "straightness")
        verify_fpp();
    if (kind == "compete") verify_compete();
    if (kind == "cayley") verify_cayley();
    std::cout << "verify " << kind << ": all checks passed\n";
    return kExitOk;
}

int run_kind(const std::string& kind, const cli_options& opt) {
    if (opt.verify) return run_verify(kind);
    if (opt.spec_path.empty()) throw spec_invalid("missing --spec");
    auto spec = experiment_spec::parse_file(opt.spec_path);
    spec.override_value("kind", kind);
    if (opt.seed_set) spec.override_value("seed", std::to_string(opt.seed));
    if (opt.replicas_set) spec.override_value("replicas", std::to_string(opt.replicas));
    if (opt.workers_set) spec.override_value("workers", std::to_string(opt.workers));

    std::string out_dir = opt.out_dir;
    if (out_dir.empty()) {
        const char* env = std::getenv("SHAPELAB_OUT");
        out_dir = env != nullptr ? env : ".";
    }
    const auto report = run_experiment(spec, out_dir);
    std::cout << "wrote " << report.output_files.size() << " files to " << out_dir << " in "
              << report.wall_seconds << " s\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-passage percolation laboratory on random geometric graphs"};
    app.require_subcommand(1);

    static const std::vector<std::string> kinds = {
        "sample",     "build",        "fpp-shape", "time-constant", "geodesics",
        "straightness", "deviations", "coupling",  "compete",       "cayley"};

    cli_options opt;
    std::string chosen;
    for (const auto& kind : kinds) {
        auto* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
        sub->add_option("--spec", opt.spec_path, "run specification file");
        sub->add_option("--out", opt.out_dir, "output directory (default $SHAPELAB_OUT or .)");
        sub->add_option("--seed", opt.seed, "master seed override")
            ->each([&](const std::string&) { opt.seed_set = true; });
        sub->add_option("--replicas", opt.replicas, "replica count override")
            ->each([&](const std::string&) { opt.replicas_set = true; });
        sub->add_option("--workers", opt.workers, "worker pool size override")
            ->each([&](const std::string&) { opt.workers_set = true; });
        sub->add_flag("--verify", opt.verify, "run the oracle battery instead of the experiment");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitSpecInvalid;
    }

    try {
        return run_kind(chosen, opt);
    } catch (const shapelab::spec_invalid& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpecInvalid;
    } catch (const shapelab::condition_violated& e) {
        std::cerr << "condition violated: " << e.what() << "\n";
        return kExitConditionViolated;
    } catch (const shapelab::resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    }
}
