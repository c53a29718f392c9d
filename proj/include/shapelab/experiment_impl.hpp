#pragma once

// Implementation of run_experiment: one block per experiment kind.

namespace shapelab {

namespace detail {

struct run_context {
    const experiment_spec& spec;
    std::filesystem::path dir;
    run_report* report;

    csv_writer csv(const std::string& name, const std::string& columns) const {
        report->output_files.push_back(name);
        return csv_writer((dir / name).string(), columns, spec.hash());
    }

    std::string path_of(const std::string& name) const {
        report->output_files.push_back(name);
        return (dir / name).string();
    }
};

inline void run_sample(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto ps = sample_ppp(config);
    save_point_set(ps, ctx.path_of("points.slps"));
    export_point_set_csv(ps, (ctx.dir / "points.csv").string(), ctx.spec.hash());
    ctx.report->output_files.push_back("points.csv");
    auto csv = ctx.csv("summary.csv", "count,expected_count");
    csv.row(std::vector<double>{static_cast<double>(ps.count()),
                                config.intensity * std::pow(config.box_side, config.dimension)});
}

inline void run_build(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    geo_graph graph(sample_ppp(config), config.radius);
    save_geo_graph(graph, ctx.path_of("graph.slgg"));
    if (ctx.spec.get_u64_or("build.export_adjacency", 0) == 1) {
        export_adjacency_csv(graph, (ctx.dir / "adjacency.csv").string(), ctx.spec.hash());
        ctx.report->output_files.push_back("adjacency.csv");
    }
    auto csv = ctx.csv("summary.csv", "vertices,edges,components,giant_size");
    csv.row(std::vector<double>{static_cast<double>(graph.vertex_count()),
                                static_cast<double>(graph.edge_count()),
                                static_cast<double>(graph.component_sizes().size()),
                                static_cast<double>(graph.giant_size())});
    const auto structure = estimate_structure(graph);
    auto scsv = ctx.csv("structure.csv",
                        "giant_density,window_side,stretch_factor,stretch_halfwidth,"
                        "hole_diameter,probe_spacing");
    scsv.row(std::vector<double>{structure.giant_density, structure.window_side,
                                 structure.stretch_factor, structure.stretch_halfwidth,
                                 structure.hole_diameter, structure.probe_spacing});
}

inline void require_shape_conditions(const sim_config& config, const weight_distribution& dist) {
    const auto flags = evaluate_conditions(dist, config.dimension, config.radius, config.intensity);
    if (!flags.zero_mass_subcritical)
        throw condition_violated("shape experiment: the zero-weight mass is supercritical");
}

inline void run_fpp_shape(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    require_shape_conditions(config, dist);
    const auto times = ctx.spec.get_double_list("shape.times");
    const double probe = ctx.spec.get_double_or("shape.probe_spacing", config.radius / 4.0);
    const auto replicas = ctx.spec.get_u64_or("replicas", 5);
    const auto workers = ctx.spec.get_u64_or("workers", 0);

    std::vector<std::vector<shape_stats>> rows(replicas);
    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        std::vector<double> origin(config.dimension, 0.0);
        for (double t : times) rows[rep].push_back(shape_statistics(field, origin, t, probe));
    });
    auto csv = ctx.csv("shape.csv",
                       "time,replica,reached,inradius,outradius,roundness,speed,clipped");
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            const auto& s = rows[rep][ti];
            csv.row(std::vector<double>{s.t, static_cast<double>(rep),
                                        static_cast<double>(s.reached_count), s.inradius,
                                        s.outradius, s.roundness, s.speed_estimate,
                                        s.window_clipped ? 1.0 : 0.0});
        }
    }
}

inline void run_time_constant(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    auto direction = ctx.spec.has("time-constant.direction")
                         ? ctx.spec.get_double_list("time-constant.direction")
                         : std::vector<double>{1.0, 0.0};
    direction.resize(config.dimension, 0.0);
    const auto scales = ctx.spec.get_double_list("time-constant.scales");
    const auto replicas = ctx.spec.get_u64_or("replicas", 32);
    const auto workers = ctx.spec.get_u64_or("workers", 0);
    const auto estimate =
        estimate_time_constant(config, dist, direction, scales, replicas, workers);

    auto samples = ctx.csv("time_constant_samples.csv", "scale,replica,value");
    for (std::size_t si = 0; si < scales.size(); ++si)
        for (std::size_t rep = 0; rep < replicas; ++rep)
            samples.row(std::vector<double>{scales[si], static_cast<double>(rep),
                                            estimate.samples[si][rep]});
    auto summary = ctx.csv("time_constant_summary.csv",
                           "scale,mean,std_error,pooled,lower_bracket,upper_bracket");
    for (std::size_t si = 0; si < scales.size(); ++si)
        summary.row(std::vector<double>{scales[si], estimate.per_scale[si].mean,
                                        estimate.per_scale[si].std_error, estimate.pooled,
                                        estimate.lower_bracket, estimate.upper_bracket});
}

inline void run_geodesics(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    const auto distances = ctx.spec.get_double_list("geodesics.distances");
    const auto replicas = ctx.spec.get_u64_or("replicas", 20);
    const auto workers = ctx.spec.get_u64_or("workers", 0);
    const double exponent = ctx.spec.get_double_or("geodesics.exponent", 0.9);
    for (double s : distances)
        if (s > config.box_side / 2.0)
            throw spec_invalid("geodesics: pair distance exceeds half the box");

    std::vector<std::vector<double>> deviations(replicas);
    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        for (double s : distances) {
            std::vector<double> x(config.dimension, 0.0), y(config.dimension, 0.0);
            x[0] = -s / 2.0;
            y[0] = s / 2.0;
            const vertex_id qx = graph.nearest_vertex(x, true);
            const vertex_id qy = graph.nearest_vertex(y, true);
            const auto fp = first_passage(field, qx, true);
            const auto path = extract_geodesic(fp, qy);
            deviations[rep].push_back(geodesic_deviation(graph, path, x, y));
        }
    });
    auto csv = ctx.csv("geodesics.csv", "distance,replica,hausdorff_deviation,exceeds_power");
    for (std::size_t si = 0; si < distances.size(); ++si)
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            const double dev = deviations[rep][si];
            csv.row(std::vector<double>{distances[si], static_cast<double>(rep), dev,
                                        dev >= std::pow(distances[si], exponent) ? 1.0 : 0.0});
        }
}

inline void run_straightness(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    const double eps = ctx.spec.get_double_or("straightness.eps", 0.1);
    const double window = ctx.spec.get_double_or("straightness.window_half_side",
                                                 config.box_side / 8.0);
    const auto replicas = ctx.spec.get_u64_or("replicas", 20);
    const auto workers = ctx.spec.get_u64_or("workers", 0);

    std::vector<std::pair<std::size_t, std::size_t>> counts(replicas);
    for_each_replica(replicas, workers, [&](std::size_t rep) {
        const geo_graph graph = build_replica_graph(config, rep);
        const auto field =
            assign_weights(graph, dist, seeds_for_replica(config.master_seed, rep).weights);
        std::vector<double> origin(config.dimension, 0.0);
        const vertex_id root = graph.nearest_vertex(origin, true);
        const auto fp = first_passage(field, root, true);
        const auto small = report_straightness(graph, fp, origin, eps, window);
        const auto large = report_straightness(graph, fp, origin, eps, 2.0 * window);
        counts[rep] = {small.violating_count, large.violating_count};
    });
    auto csv = ctx.csv("straightness.csv", "replica,violations_window,violations_double_window");
    for (std::size_t rep = 0; rep < replicas; ++rep)
        csv.row(std::vector<double>{static_cast<double>(rep),
                                    static_cast<double>(counts[rep].first),
                                    static_cast<double>(counts[rep].second)});
}

inline void run_deviations(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    const auto distances = ctx.spec.get_double_list("deviations.distances");
    const auto thresholds = ctx.spec.get_double_list("deviations.thresholds");
    const auto replicas = ctx.spec.get_u64_or("replicas", 300);
    const auto workers = ctx.spec.get_u64_or("workers", 0);
    const auto result =
        deviation_statistics(config, dist, distances, thresholds, replicas, workers);

    auto summary = ctx.csv("deviation_summary.csv", "distance,mean,variance,normalized_variance");
    for (std::size_t xi = 0; xi < distances.size(); ++xi) {
        const auto& s = result.per_distance[xi];
        summary.row(std::vector<double>{distances[xi], s.mean, s.variance,
                                        s.variance / (distances[xi] * std::log(distances[xi]))});
    }
    auto tails = ctx.csv("deviation_tails.csv", "distance,threshold,frequency");
    for (std::size_t xi = 0; xi < distances.size(); ++xi)
        for (std::size_t li = 0; li < thresholds.size(); ++li)
            tails.row(std::vector<double>{distances[xi], thresholds[li],
                                          result.tail_frequency[xi][li]});
}

inline void run_coupling(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    const auto dist = weights_from(ctx.spec);
    auto x = ctx.spec.get_double_list("coupling.x");
    x.resize(config.dimension, 0.0);
    const auto pitches = ctx.spec.get_double_list("coupling.pitches");
    const auto replicas = ctx.spec.get_u64_or("replicas", 200);
    const auto workers = ctx.spec.get_u64_or("workers", 0);
    const auto table = coupling_frequencies(config, dist, x, pitches, replicas, workers);

    auto csv = ctx.csv("coupling.csv",
                       "pitch,freq_truncated_mismatch,trunc_ci_low,trunc_ci_high,"
                       "freq_augmented_mismatch,aug_ci_low,aug_ci_high,replicas");
    for (std::size_t ti = 0; ti < pitches.size(); ++ti)
        csv.row(std::vector<double>{pitches[ti], table.freq_truncated_mismatch[ti],
                                    table.truncated_ci[ti].low, table.truncated_ci[ti].high,
                                    table.freq_augmented_mismatch[ti], table.augmented_ci[ti].low,
                                    table.augmented_ci[ti].high,
                                    static_cast<double>(table.replicas)});
}

inline void run_compete(const run_context& ctx) {
    const auto config = sim_config_from(ctx.spec);
    auto red_center = ctx.spec.get_double_list("compete.red_center");
    auto blue_center = ctx.spec.get_double_list("compete.blue_center");
    red_center.resize(config.dimension, 0.0);
    blue_center.resize(config.dimension, 0.0);
    const double ball_radius = ctx.spec.get_double_or("compete.ball_radius", 3.0);
    const double horizon = ctx.spec.get_double("compete.horizon");
    const auto replicas = ctx.spec.get_u64_or("replicas", 200);
    const auto workers = ctx.spec.get_u64_or("workers", 0);
    const double spacing = ctx.spec.get_double_or("compete.probe_spacing", config.radius / 4.0);

    const auto red_sites = ball_probe_points(red_center, ball_radius, spacing);
    const auto blue_sites = ball_probe_points(blue_center, ball_radius, spacing);
    const auto estimate =
        estimate_coexistence(config, red_sites, blue_sites, horizon, replicas, workers);

    auto csv = ctx.csv("coexistence.csv",
                       "probability,ci_low,ci_high,replicas,red_extinct,blue_extinct");
    csv.row(std::vector<double>{estimate.probability, estimate.ci.low, estimate.ci.high,
                                static_cast<double>(estimate.replicas),
                                static_cast<double>(estimate.red_extinct),
                                static_cast<double>(estimate.blue_extinct)});

    // Trajectory of replica 0 at evenly spaced checkpoints.
    {
        const geo_graph graph = build_replica_graph(config, 0);
        competition_state state(graph, red_sites, blue_sites, overlap_rule::red_wins);
        std::vector<double> checkpoints;
        for (int i = 1; i <= 8; ++i) checkpoints.push_back(horizon * i / 8.0);
        const auto run = run_competition(state, horizon, 100'000'000,
                                         derive_stream(config.master_seed, "dynamics", 0),
                                         checkpoints);
        auto traj = ctx.csv("trajectory.csv", "time,vertex,occupancy");
        for (const auto& snap : run.snapshots)
            for (vertex_id v = 0; v < snap.sites.size(); ++v)
                if (snap.sites[v] != occupancy::empty)
                    traj.row(std::vector<double>{snap.time, static_cast<double>(v),
                                                 static_cast<double>(snap.sites[v])});
    }

    std::ofstream summary((ctx.dir / "summary.txt").string(), std::ios::trunc);
    ctx.report->output_files.push_back("summary.txt");
    summary << "schema_version = 1\n"
            << "coexistence_probability = " << csv_writer::format(estimate.probability) << "\n"
            << "ci_low = " << csv_writer::format(estimate.ci.low) << "\n"
            << "ci_high = " << csv_writer::format(estimate.ci.high) << "\n"
            << "replicas = " << estimate.replicas << "\n"
            << "red_extinct = " << estimate.red_extinct << "\n"
            << "blue_extinct = " << estimate.blue_extinct << "\n";
}

inline void run_cayley(const run_context& ctx) {
    const auto n_max = static_cast<int>(ctx.spec.get_u64_or("cayley.growth_n_max", 20));
    const auto m_max = static_cast<std::int64_t>(ctx.spec.get_u64_or("cayley.central_m_max", 100));
    const auto target_radius = static_cast<int>(ctx.spec.get_u64_or("cayley.target_radius", 8));
    const auto seed = ctx.spec.get_u64_or("seed", 1);

    const auto growth = growth_and_central_scaling(n_max, m_max);
    auto gcsv = ctx.csv("cayley_growth.csv", "radius,ball_size,growth_exponent");
    for (std::size_t n = 0; n < growth.ball_sizes.size(); ++n)
        gcsv.row(std::vector<double>{static_cast<double>(n),
                                     static_cast<double>(growth.ball_sizes[n]),
                                     growth.growth_exponent});
    auto ccsv = ctx.csv("cayley_central.csv", "m,word_norm,ratio_to_sqrt_m");
    for (std::size_t i = 0; i < growth.square_m.size(); ++i)
        ccsv.row(std::vector<double>{static_cast<double>(growth.square_m[i]),
                                     static_cast<double>(growth.central_norms[i]),
                                     growth.central_ratios[i]});

    const auto model_name = ctx.spec.get_string_or("cayley.model", "coloring");
    const word_ball ball(2 * target_radius);
    cayley_fpp_result fpp;
    if (model_name == "coloring") {
        const auto colors = ctx.spec.get_u64_or("cayley.colors", 4);
        random_coloring_model model{std::vector<double>(colors, 1.0 / colors)};
        fpp = cayley_fpp(ball, model, seed, target_radius);
    } else if (model_name == "directional") {
        directional_exponential_model model{ctx.spec.get_double_or("cayley.rate_x", 1.0),
                                            ctx.spec.get_double_or("cayley.rate_y", 1.0)};
        fpp = cayley_fpp(ball, model, seed, target_radius);
    } else {
        throw spec_invalid("cayley: unknown model '" + model_name + "'");
    }
    auto fcsv = ctx.csv("cayley_fpp.csv", "x,y,z,word_norm,passage_time");
    for (std::size_t i = 0; i < ball.size(); ++i) {
        if (ball.norm_at(i) > target_radius) continue;
        const auto& g = ball.elements()[i];
        fcsv.row(std::vector<double>{static_cast<double>(g.x), static_cast<double>(g.y),
                                     static_cast<double>(g.z),
                                     static_cast<double>(ball.norm_at(i)), fpp.passage_time[i]});
    }

    if (ctx.spec.has("cayley.exponents")) {
        const auto exp_list = ctx.spec.get_double_list("cayley.exponents");
        std::vector<std::int64_t> exponents(exp_list.begin(), exp_list.end());
        auto gen = ctx.spec.has("cayley.generator") ? ctx.spec.get_double_list("cayley.generator")
                                                    : std::vector<double>{0.0, 0.0, 1.0};
        const heisenberg_element g{static_cast<std::int64_t>(gen[0]),
                                   static_cast<std::int64_t>(gen[1]),
                                   static_cast<std::int64_t>(gen[2])};
        const auto replicas = ctx.spec.get_u64_or("replicas", 20);
        cocycle_convergence_result conv;
        if (model_name == "coloring") {
            const auto colors = ctx.spec.get_u64_or("cayley.colors", 4);
            random_coloring_model model{std::vector<double>(colors, 1.0 / colors)};
            conv = cocycle_convergence(g, model, exponents, replicas, seed);
        } else {
            directional_exponential_model model{ctx.spec.get_double_or("cayley.rate_x", 1.0),
                                                ctx.spec.get_double_or("cayley.rate_y", 1.0)};
            conv = cocycle_convergence(g, model, exponents, replicas, seed);
        }
        auto vcsv = ctx.csv("cayley_convergence.csv", "exponent,mean,std_error,fekete_trend");
        for (std::size_t i = 0; i < conv.exponents.size(); ++i)
            vcsv.row(std::vector<double>{static_cast<double>(conv.exponents[i]),
                                         conv.per_exponent[i].mean, conv.per_exponent[i].std_error,
                                         conv.fekete_trend ? 1.0 : 0.0});
    }
}

}  // namespace detail

inline run_report run_experiment(const experiment_spec& spec, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const auto kind = spec.get_string("kind");
    using runner = void (*)(const detail::run_context&);
    static const std::map<std::string, runner> dispatch = {
        {"sample", detail::run_sample},         {"build", detail::run_build},
        {"fpp-shape", detail::run_fpp_shape},   {"time-constant", detail::run_time_constant},
        {"geodesics", detail::run_geodesics},   {"straightness", detail::run_straightness},
        {"deviations", detail::run_deviations}, {"coupling", detail::run_coupling},
        {"compete", detail::run_compete},       {"cayley", detail::run_cayley}};
    const auto it = dispatch.find(kind);
    if (it == dispatch.end()) throw spec_invalid("unknown experiment kind '" + kind + "'");

    std::filesystem::create_directories(out_dir);
    run_report report;
    detail::run_context ctx{spec, std::filesystem::path(out_dir), &report};
    it->second(ctx);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail::write_manifest(ctx.dir, spec, report);
    report.output_files.push_back("manifest.json");
    return report;
}

}  // namespace shapelab
