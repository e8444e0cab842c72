#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cricci/builders.hpp"
#include "cricci/gamma.hpp"
#include "cricci/io.hpp"
#include "cricci/oracles.hpp"
#include "cricci/parallel.hpp"
#include "cricci/rng.hpp"
#include "cricci/transport.hpp"

using nlohmann::ordered_json;
using namespace cricci;

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct GlobalOpts {
    std::string format = "json";
    std::uint64_t seed = 0;
    int threads = 0;
    double tol = 1e-9;
    std::string out = "-";
    std::string plot;
};

struct InputOpts {
    std::string graph;
    std::string cloud;
    std::string matrix;
    std::string op;
    std::string measure;
    std::string geometry;
    std::string sample;
    std::string kind = "markov";
    std::string normalization = "laplace-beltrami";
    bool weighted = false;
    bool asymmetric = false;
    double bandwidth = 0.0;
    double cutoff = 0.0;
};

int count_sources(const InputOpts& in) {
    return static_cast<int>(!in.graph.empty()) +
           static_cast<int>(!in.cloud.empty()) +
           static_cast<int>(!in.matrix.empty()) +
           static_cast<int>(!in.geometry.empty());
}

void require_one_source(const InputOpts& in) {
    if (count_sources(in) != 1)
        fail(ErrorCode::InvalidInput,
             "exactly one input source required: --graph, --cloud, --matrix, "
             "or --geometry");
}

GeneratorKind parse_kind(const std::string& s) {
    if (s == "markov") return GeneratorKind::markov;
    if (s == "grid") return GeneratorKind::grid;
    if (s == "kernel") return GeneratorKind::kernel;
    if (s == "custom") return GeneratorKind::custom;
    fail(ErrorCode::InvalidInput, "unknown generator kind '" + s + "'");
}

KernelConfig kernel_config(const InputOpts& in) {
    KernelConfig cfg;
    cfg.bandwidth = in.bandwidth;
    cfg.cutoff = in.cutoff;
    if (in.normalization == "laplace-beltrami")
        cfg.normalization = KernelNormalization::laplace_beltrami;
    else if (in.normalization == "fokker-planck")
        cfg.normalization = KernelNormalization::fokker_planck;
    else
        fail(ErrorCode::InvalidInput,
             "normalization must be laplace-beltrami or fokker-planck");
    return cfg;
}

PairFilter parse_pairs(const std::string& spec, std::uint64_t default_seed) {
    PairFilter f;
    if (spec == "all") {
        f.mode = PairFilter::Mode::all;
        return f;
    }
    if (spec.rfind("random:", 0) == 0) {
        f.mode = PairFilter::Mode::random;
        f.seed = default_seed;
        const std::string rest = spec.substr(7);
        const auto colon = rest.find(':');
        try {
            f.count = std::stoi(rest.substr(0, colon));
        } catch (...) {
            fail(ErrorCode::InvalidInput, "cannot parse pair count in '" + spec + "'");
        }
        if (colon != std::string::npos) {
            const std::string tail = rest.substr(colon + 1);
            if (tail.rfind("seed=", 0) != 0)
                fail(ErrorCode::InvalidInput,
                     "expected random:k[:seed=s], got '" + spec + "'");
            f.seed = std::stoull(tail.substr(5));
        }
        if (f.count <= 0)
            fail(ErrorCode::InvalidInput, "pair count must be positive");
        return f;
    }
    if (spec.rfind("maxdist:", 0) == 0) {
        f.mode = PairFilter::Mode::maxdist;
        try {
            f.max_distance = std::stod(spec.substr(8));
        } catch (...) {
            fail(ErrorCode::InvalidInput, "cannot parse radius in '" + spec + "'");
        }
        return f;
    }
    fail(ErrorCode::InvalidInput,
         "pair filter must be all, random:k[:seed=s], or maxdist:r");
}

void guard_all_pairs(const PairFilter& f, int n) {
    if (f.mode == PairFilter::Mode::all && n > 300)
        fail(ErrorCode::InvalidInput,
             "pair filter 'all' is limited to 300 points (" +
                 std::to_string(n) +
                 " given); use random:k:seed=s or maxdist:r");
}

struct SampleSpec {
    Sampler sampler;
    int count;
    std::uint64_t seed;
};

SampleSpec parse_sample(const std::string& spec, std::uint64_t default_seed) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 3)
        fail(ErrorCode::InvalidInput,
             "expected --sample name:N[:seed=s], got '" + spec + "'");
    SampleSpec s;
    s.sampler = parse_sampler(parts[0]);
    try {
        s.count = std::stoi(parts[1]);
    } catch (...) {
        fail(ErrorCode::InvalidInput, "cannot parse sample count in '" + spec + "'");
    }
    s.seed = default_seed;
    if (parts.size() == 3) {
        if (parts[2].rfind("seed=", 0) != 0)
            fail(ErrorCode::InvalidInput,
                 "expected --sample name:N[:seed=s], got '" + spec + "'");
        s.seed = std::stoull(parts[2].substr(5));
    }
    return s;
}

// Everything a command can build from its input flags.
struct BuiltInput {
    std::optional<Generator> L;
    std::optional<MetricMeasureSpace> space;
    std::optional<SmoothGeometry> geom;
    std::vector<Vector> points; // sampled geometry
    std::vector<std::string> warnings;
};

BuiltInput build_input(const InputOpts& in, std::uint64_t seed,
                       bool sample_geometry) {
    require_one_source(in);
    BuiltInput built;
    if (!in.graph.empty()) {
        GraphOperator g = graph_generator(
            read_edge_list(in.graph),
            in.weighted ? DistanceMode::weighted : DistanceMode::unit_hop);
        built.L = std::move(g.L);
        built.space = std::move(g.space);
        built.warnings = std::move(g.warnings);
    } else if (!in.cloud.empty()) {
        KernelOperator k =
            pointcloud_generator(read_points_csv(in.cloud), kernel_config(in));
        built.L = std::move(k.L);
        built.space = std::move(k.space);
    } else if (!in.matrix.empty()) {
        Matrix dist = read_matrix_csv(in.matrix);
        std::optional<Vector> measure;
        if (!in.measure.empty())
            measure = read_measure_csv(in.measure,
                                       static_cast<int>(dist.rows()));
        built.space =
            build_space(std::move(dist), measure, !in.asymmetric, {});
        if (!in.op.empty())
            built.L = make_generator(read_operator_file(in.op),
                                     parse_kind(in.kind));
        if (built.L && built.L->n() != built.space->n())
            fail(ErrorCode::DimensionMismatch,
                 "operator and distance matrix sizes differ");
    } else {
        built.geom = SmoothGeometry::parse(in.geometry);
        if (sample_geometry) {
            if (in.sample.empty())
                fail(ErrorCode::InvalidInput,
                     "geometry input needs --sample name:N[:seed=s] here");
            const SampleSpec s = parse_sample(in.sample, seed);
            Discretization d =
                discretize(*built.geom, s.sampler, s.count, s.seed);
            built.points = std::move(d.points);
            built.space = std::move(d.space);
        }
    }
    return built;
}

ordered_json config_json(const std::string& command, const GlobalOpts& g,
                         const InputOpts& in,
                         const ordered_json& extra = ordered_json::object()) {
    ordered_json cfg;
    cfg["command"] = command;
    cfg["format"] = g.format;
    cfg["seed"] = g.seed;
    cfg["threads"] = num_threads();
    cfg["tol"] = g.tol;
    cfg["out"] = g.out;
    ordered_json inputs = ordered_json::object();
    if (!in.graph.empty()) inputs["graph"] = in.graph;
    if (!in.cloud.empty()) inputs["cloud"] = in.cloud;
    if (!in.matrix.empty()) inputs["matrix"] = in.matrix;
    if (!in.op.empty()) inputs["operator"] = in.op;
    if (!in.measure.empty()) inputs["measure"] = in.measure;
    if (!in.geometry.empty()) inputs["geometry"] = in.geometry;
    if (!in.sample.empty()) inputs["sample"] = in.sample;
    if (in.weighted) inputs["weighted"] = true;
    if (in.asymmetric) inputs["asymmetric"] = true;
    if (!in.cloud.empty() || in.bandwidth > 0.0) {
        inputs["bandwidth"] = in.bandwidth;
        inputs["normalization"] = in.normalization;
        if (in.cutoff > 0.0) inputs["cutoff"] = in.cutoff;
    }
    if (!in.matrix.empty() && !in.op.empty()) inputs["kind"] = in.kind;
    cfg["inputs"] = std::move(inputs);
    for (const auto& [k, v] : extra.items()) cfg[k] = v;
    return cfg;
}

std::string config_comment(const ordered_json& cfg) {
    std::string line = "# config";
    for (const auto& [k, v] : cfg.items()) {
        if (k == "inputs") {
            for (const auto& [ik, iv] : v.items())
                line += " " + ik + "=" +
                        (iv.is_string() ? iv.get<std::string>() : iv.dump());
        } else {
            line += " " + k + "=" +
                    (v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return line + "\n";
}

ordered_json json_number(double v) {
    // JSON has no literal for non-finite values; nlohmann emits null
    return v;
}

void emit(const GlobalOpts& g, const ordered_json& doc,
          const std::string& csv) {
    if (g.format == "json")
        write_text_file(g.out, doc.dump(2) + "\n");
    else
        write_text_file(g.out, csv);
}

// --------------------------------------------------------------------------
// ric
// --------------------------------------------------------------------------

struct RicOpts {
    std::string pairs = "all";
    bool symmetrize = false;
};

int cmd_ric(const GlobalOpts& g, const InputOpts& in, const RicOpts& opt) {
    const bool analytic = !in.geometry.empty();
    BuiltInput built = build_input(in, g.seed, true);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";

    PairFilter filter = parse_pairs(opt.pairs, g.seed);
    CoarseRicciReport report;
    if (analytic) {
        guard_all_pairs(filter, static_cast<int>(built.points.size()));
        report = analytic_ricci_scan(*built.geom, built.points, filter);
    } else {
        guard_all_pairs(filter, built.space->n());
        report = coarse_ricci_matrix(*built.L, *built.space, filter,
                                     opt.symmetrize);
    }

    ordered_json extra{{"pairs_filter", opt.pairs},
                       {"symmetrize", opt.symmetrize}};
    const ordered_json cfg = config_json("ric", g, in, extra);
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["config"] = cfg;
    ordered_json jp = ordered_json::array();
    for (const auto& p : report.pairs)
        jp.push_back(ordered_json{{"x", p.x},
                                  {"y", p.y},
                                  {"d", p.d},
                                  {"ric", p.ric},
                                  {"ratio", p.ratio}});
    doc["pairs"] = std::move(jp);
    doc["K_est"] = json_number(report.K_est);
    ordered_json jc = ordered_json::array();
    for (const auto& [x, y] : report.cut_pairs)
        jc.push_back(ordered_json::array({x, y}));
    doc["cut_pairs"] = std::move(jc);

    std::ostringstream csv;
    csv << "# format_version," << kFormatVersion << "\n"
        << config_comment(cfg) << "# K_est," << fmt(report.K_est) << "\n"
        << "x,y,d,ric,ratio\n";
    std::ostringstream rows;
    for (const auto& p : report.pairs)
        rows << p.x << "," << p.y << "," << fmt(p.d) << "," << fmt(p.ric)
             << "," << fmt(p.ratio) << "\n";
    csv << rows.str();
    for (const auto& [x, y] : report.cut_pairs)
        csv << "# cut," << x << "," << y << "\n";
    emit(g, doc, csv.str());
    if (!g.plot.empty())
        write_text_file(g.plot, "x,y,d,ric,ratio\n" + rows.str());

    std::cout << "K_est=" << fmt(report.K_est)
              << " pairs=" << report.pairs.size()
              << " cut=" << report.cut_pairs.size() << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// recover
// --------------------------------------------------------------------------

struct RecoverOpts {
    int probes = 20;
    std::string method = "richardson";
    double h = 0.0;
};

int cmd_recover(const GlobalOpts& g, const InputOpts& in,
                const RecoverOpts& opt) {
    if (in.geometry.empty())
        fail(ErrorCode::InvalidInput, "recover needs --geometry");
    require_one_source(in);
    SmoothGeometry geom = SmoothGeometry::parse(in.geometry);
    // The weighted flag selects the weighted Laplacian for the Gaussian
    // model; without it the plain flat Laplacian is probed.
    if (geom.kind == SmoothGeometry::Kind::gaussian_ou && !in.weighted)
        geom = SmoothGeometry::euclidean(geom.dim);
    const RecoveryMethod method =
        opt.method == "fd" ? RecoveryMethod::finite_difference
        : opt.method == "richardson"
            ? RecoveryMethod::richardson
            : (fail(ErrorCode::InvalidInput,
                    "method must be fd or richardson"),
               RecoveryMethod::richardson);
    if (opt.probes < 1)
        fail(ErrorCode::InvalidInput, "need at least one probe");

    struct Row {
        Vector x, V;
        double recovered, exact, err;
    };
    std::vector<Row> rowsv(opt.probes);
    for (int i = 0; i < opt.probes; ++i) {
        auto rng = substream(g.seed, static_cast<std::uint64_t>(i));
        Row r;
        r.x = geom.random_point(rng);
        std::uniform_real_distribution<double> mag(0.5, 1.5);
        r.V = mag(rng) * geom.random_tangent(r.x, rng);
        r.recovered = ricci_recovery(geom, CurveProbe{r.x, r.V, opt.h}, method);
        r.exact = geom.ricci_form(r.x, r.V);
        r.err = std::abs(r.recovered - r.exact);
        rowsv[i] = std::move(r);
    }
    double max_err = 0;
    for (const auto& r : rowsv) max_err = std::max(max_err, r.err);

    ordered_json extra{{"probes", opt.probes},
                       {"method", opt.method},
                       {"h", opt.h}};
    const ordered_json cfg = config_json("recover", g, in, extra);
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["config"] = cfg;
    ordered_json jp = ordered_json::array();
    for (const auto& r : rowsv) {
        ordered_json x = ordered_json::array(), v = ordered_json::array();
        for (int a = 0; a < r.x.size(); ++a) x.push_back(r.x(a));
        for (int a = 0; a < r.V.size(); ++a) v.push_back(r.V(a));
        jp.push_back(ordered_json{{"x", x},
                                  {"V", v},
                                  {"recovered", r.recovered},
                                  {"exact", r.exact},
                                  {"abs_error", r.err}});
    }
    doc["probes"] = std::move(jp);
    doc["max_abs_error"] = max_err;

    auto join = [](const Vector& v) {
        std::string s;
        for (int a = 0; a < v.size(); ++a)
            s += (a ? ";" : "") + fmt(v(a));
        return s;
    };
    std::ostringstream rows;
    for (const auto& r : rowsv)
        rows << join(r.x) << "," << join(r.V) << "," << fmt(r.recovered)
             << "," << fmt(r.exact) << "," << fmt(r.err) << "\n";
    std::ostringstream csv;
    csv << "# format_version," << kFormatVersion << "\n"
        << config_comment(cfg) << "# max_abs_error," << fmt(max_err) << "\n"
        << "x,V,recovered,exact,abs_error\n"
        << rows.str();
    emit(g, doc, csv.str());
    if (!g.plot.empty())
        write_text_file(g.plot,
                        "x,V,recovered,exact,abs_error\n" + rows.str());

    std::cout << "max_abs_error=" << fmt(max_err)
              << " probes=" << opt.probes << "\n";
    if (max_err > g.tol) {
        std::cerr << "error: recovery error " << fmt(max_err)
                  << " exceeds tolerance " << fmt(g.tol) << "\n";
        return 3;
    }
    return 0;
}

// --------------------------------------------------------------------------
// compare
// --------------------------------------------------------------------------

struct CompareOpts {
    std::string pairs = "all";
    std::string step = "lazy";
    double t = 1.0;
};

int cmd_compare(const GlobalOpts& g, const InputOpts& in,
                const CompareOpts& opt) {
    if (in.graph.empty() && in.geometry.empty())
        fail(ErrorCode::InvalidInput,
             "compare needs --graph or a sampled --geometry");
    BuiltInput built = build_input(in, g.seed, true);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
    if (!built.L) {
        // sampled geometry: kernel operator on the sample, intrinsic metric
        KernelOperator k = pointcloud_generator(built.points, kernel_config(in));
        built.L = std::move(k.L);
    }
    const Generator& L = *built.L;
    const MetricMeasureSpace& space = *built.space;

    Matrix step;
    if (opt.step == "lazy")
        step = lazy_step_kernel(L);
    else if (opt.step == "semigroup")
        step = semigroup_matrix(L, opt.t);
    else
        fail(ErrorCode::InvalidInput, "step must be lazy or semigroup");

    PairFilter filter = parse_pairs(opt.pairs, g.seed);
    guard_all_pairs(filter, space.n());
    CoarseRicciReport report = coarse_ricci_matrix(L, space, filter);

    std::vector<double> kappa(report.pairs.size());
    parallel_for(report.pairs.size(), [&](std::size_t i) {
        kappa[i] =
            ollivier_kappa(space, step, report.pairs[i].x, report.pairs[i].y);
    });

    double corr = std::numeric_limits<double>::quiet_NaN();
    if (report.pairs.size() >= 2) {
        double mr = 0, mk = 0;
        for (std::size_t i = 0; i < kappa.size(); ++i) {
            mr += report.pairs[i].ratio;
            mk += kappa[i];
        }
        mr /= static_cast<double>(kappa.size());
        mk /= static_cast<double>(kappa.size());
        double cc = 0, vr = 0, vk = 0;
        for (std::size_t i = 0; i < kappa.size(); ++i) {
            const double a = report.pairs[i].ratio - mr, b = kappa[i] - mk;
            cc += a * b;
            vr += a * a;
            vk += b * b;
        }
        if (vr > 0 && vk > 0) corr = cc / std::sqrt(vr * vk);
    }

    ordered_json extra{{"pairs_filter", opt.pairs}, {"step", opt.step}};
    if (opt.step == "semigroup") extra["t"] = opt.t;
    const ordered_json cfg = config_json("compare", g, in, extra);
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["config"] = cfg;
    ordered_json jp = ordered_json::array();
    for (std::size_t i = 0; i < report.pairs.size(); ++i) {
        const auto& p = report.pairs[i];
        jp.push_back(ordered_json{{"x", p.x},
                                  {"y", p.y},
                                  {"d", p.d},
                                  {"ric", p.ric},
                                  {"ratio", p.ratio},
                                  {"kappa", kappa[i]}});
    }
    doc["pairs"] = std::move(jp);
    doc["correlation"] =
        std::isfinite(corr) ? ordered_json(corr) : ordered_json(nullptr);

    std::ostringstream rows;
    for (std::size_t i = 0; i < report.pairs.size(); ++i) {
        const auto& p = report.pairs[i];
        rows << p.x << "," << p.y << "," << fmt(p.d) << "," << fmt(p.ric)
             << "," << fmt(p.ratio) << "," << fmt(kappa[i]) << "\n";
    }
    std::ostringstream csv;
    csv << "# format_version," << kFormatVersion << "\n"
        << config_comment(cfg) << "# correlation," << fmt(corr) << "\n"
        << "x,y,d,ric,ratio,kappa\n"
        << rows.str();
    emit(g, doc, csv.str());
    if (!g.plot.empty())
        write_text_file(g.plot, "x,y,d,ric,ratio,kappa\n" + rows.str());

    std::cout << "pairs=" << report.pairs.size() << " correlation="
              << fmt(corr) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// audit
// --------------------------------------------------------------------------

struct AuditOpts {
    std::string pairs = "all";
    double K = 0.0; // 0 means estimate from cd_estimate
    int trials = 10000;
};

int cmd_audit(const GlobalOpts& g, const InputOpts& in, const AuditOpts& opt) {
    if (in.graph.empty() && (in.matrix.empty() || in.op.empty()))
        fail(ErrorCode::InvalidInput,
             "audit needs --graph or --matrix with --operator");
    BuiltInput built = build_input(in, g.seed, false);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
    const Generator& L = *built.L;
    const MetricMeasureSpace& space = *built.space;

    StationaryMeasure stat = invariant_measure(L);

    double K = opt.K;
    std::string source = "flag";
    if (K == 0.0) {
        source = "estimate";
        K = std::numeric_limits<double>::infinity();
        for (int x = 0; x < L.n(); ++x)
            if (L.is_interior(x)) K = std::min(K, cd_estimate(L, x).k);
        if (!(K > 0.0))
            fail(ErrorCode::NonpositiveK,
                 "estimated curvature bound " + fmt(K) +
                     " is not positive; supply --K");
    }

    LogSobolevReport lsi = log_sobolev_audit(L, stat.mu, K, opt.trials, g.seed);

    PairFilter filter = parse_pairs(opt.pairs, g.seed);
    guard_all_pairs(filter, space.n());
    std::vector<DistCarreEntry> table = distcarre_check(L, space, filter);
    int failures = 0;
    for (const auto& e : table)
        if (e.ratio < 1.0 - 1e-9) ++failures;

    ordered_json extra{{"pairs_filter", opt.pairs},
                       {"K", K},
                       {"K_source", source},
                       {"trials", opt.trials}};
    const ordered_json cfg = config_json("audit", g, in, extra);
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["config"] = cfg;
    doc["K"] = K;
    doc["K_source"] = source;
    doc["invariant_measure_residual"] = stat.residual;
    doc["detailed_balance"] = stat.detailed_balance;
    doc["trials"] = lsi.trials;
    doc["violations"] = lsi.violations;
    ordered_json jv = ordered_json::array();
    for (int i = 0; i < lsi.trials; ++i)
        if (lsi.results[i].violated)
            jv.push_back(ordered_json{{"trial", i},
                                      {"lhs", lsi.results[i].lhs},
                                      {"rhs", lsi.results[i].rhs}});
    doc["violating_trials"] = std::move(jv);
    ordered_json jd = ordered_json::array();
    for (const auto& e : table)
        jd.push_back(ordered_json{{"x", e.x},
                                  {"y", e.y},
                                  {"d", e.d},
                                  {"gamma", e.gamma},
                                  {"ratio", e.ratio},
                                  {"holds", e.ratio >= 1.0 - 1e-9}});
    doc["distcarre"] = std::move(jd);

    std::ostringstream rows;
    for (const auto& e : table)
        rows << e.x << "," << e.y << "," << fmt(e.d) << "," << fmt(e.gamma)
             << "," << fmt(e.ratio) << ","
             << (e.ratio >= 1.0 - 1e-9 ? "holds" : "<1") << "\n";
    std::ostringstream csv;
    csv << "# format_version," << kFormatVersion << "\n"
        << config_comment(cfg) << "# K," << fmt(K) << ",source," << source
        << "\n"
        << "# violations," << lsi.violations << ",trials," << lsi.trials
        << "\n"
        << "x,y,d,gamma,ratio,condition\n"
        << rows.str();
    emit(g, doc, csv.str());
    if (!g.plot.empty())
        write_text_file(g.plot, "x,y,d,gamma,ratio\n" + [&] {
            std::ostringstream p;
            for (const auto& e : table)
                p << e.x << "," << e.y << "," << fmt(e.d) << ","
                  << fmt(e.gamma) << "," << fmt(e.ratio) << "\n";
            return p.str();
        }());

    std::cout << "K=" << fmt(K) << " violations=" << lsi.violations << "/"
              << lsi.trials << " distcarre_failures=" << failures << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// transport
// --------------------------------------------------------------------------

struct TransportOpts {
    std::string mu, nu;
    int p = 1;
    bool entropy_mode = false;
    bool kappa_mode = false;
    bool contract_mode = false;
    int x = -1, y = -1;
    std::string step = "lazy";
    double t = 1.0;
    double tmin = 0.1, tmax = 1.0;
    int tsteps = 5;
};

int cmd_transport(const GlobalOpts& g, const InputOpts& in,
                  const TransportOpts& opt) {
    BuiltInput built = build_input(in, g.seed, true);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
    if (!built.space)
        fail(ErrorCode::InvalidInput, "transport needs a finite space input");
    const MetricMeasureSpace& space = *built.space;

    const int modes = static_cast<int>(opt.entropy_mode) +
                      static_cast<int>(opt.kappa_mode) +
                      static_cast<int>(opt.contract_mode);
    if (modes > 1)
        fail(ErrorCode::InvalidInput,
             "--entropy, --kappa, and --contract are mutually exclusive");

    ordered_json extra{{"p", opt.p}};
    ordered_json doc;
    std::ostringstream csv;
    std::string summary;
    std::string plot;

    if (opt.kappa_mode || opt.contract_mode) {
        if (!built.L)
            fail(ErrorCode::InvalidInput,
                 "this transport mode needs an operator (--graph or "
                 "--matrix with --operator)");
        if (opt.x < 0 || opt.y < 0)
            fail(ErrorCode::InvalidInput, "supply --x and --y point indices");
    }

    if (opt.contract_mode) {
        if (opt.tsteps < 3)
            fail(ErrorCode::InvalidInput, "need >= 3 t-grid points");
        std::vector<double> grid(opt.tsteps);
        for (int i = 0; i < opt.tsteps; ++i)
            grid[i] = opt.tmin +
                      (opt.tmax - opt.tmin) * i / (opt.tsteps - 1.0);
        DecayFit fit =
            contraction_rate(*built.L, space, opt.x, opt.y, grid, opt.p);
        extra["mode"] = "contract";
        extra["x"] = opt.x;
        extra["y"] = opt.y;
        const ordered_json cfg = config_json("transport", g, in, extra);
        doc["format_version"] = kFormatVersion;
        doc["config"] = cfg;
        doc["rate"] = fit.rate;
        ordered_json jt = ordered_json::array();
        for (std::size_t i = 0; i < fit.times.size(); ++i)
            jt.push_back(ordered_json{{"t", fit.times[i]},
                                      {"w", fit.distances[i]}});
        doc["decay"] = std::move(jt);
        std::ostringstream rows;
        for (std::size_t i = 0; i < fit.times.size(); ++i)
            rows << fmt(fit.times[i]) << "," << fmt(fit.distances[i]) << "\n";
        csv << "# format_version," << kFormatVersion << "\n"
            << config_comment(cfg) << "# rate," << fmt(fit.rate) << "\n"
            << "t,w\n"
            << rows.str();
        plot = "t,w\n" + rows.str();
        summary = "rate=" + fmt(fit.rate);
    } else if (opt.kappa_mode) {
        Matrix step = opt.step == "lazy" ? lazy_step_kernel(*built.L)
                      : opt.step == "semigroup"
                          ? semigroup_matrix(*built.L, opt.t)
                          : (fail(ErrorCode::InvalidInput,
                                  "step must be lazy or semigroup"),
                             Matrix());
        const double kappa = ollivier_kappa(space, step, opt.x, opt.y);
        extra["mode"] = "kappa";
        extra["x"] = opt.x;
        extra["y"] = opt.y;
        extra["step"] = opt.step;
        if (opt.step == "semigroup") extra["t"] = opt.t;
        const ordered_json cfg = config_json("transport", g, in, extra);
        doc["format_version"] = kFormatVersion;
        doc["config"] = cfg;
        doc["kappa"] = kappa;
        csv << "# format_version," << kFormatVersion << "\n"
            << config_comment(cfg) << "kappa\n"
            << fmt(kappa) << "\n";
        plot = "kappa\n" + fmt(kappa) + "\n";
        summary = "kappa=" + fmt(kappa);
    } else {
        if (opt.mu.empty() || opt.nu.empty())
            fail(ErrorCode::InvalidInput, "supply --mu and --nu measure files");
        DiscreteMeasure mu =
            make_measure(read_measure_csv(opt.mu, space.n()));
        DiscreteMeasure nu =
            make_measure(read_measure_csv(opt.nu, space.n()));
        if (opt.entropy_mode) {
            const double e = entropy(mu, nu);
            extra["mode"] = "entropy";
            const ordered_json cfg = config_json("transport", g, in, extra);
            doc["format_version"] = kFormatVersion;
            doc["config"] = cfg;
            doc["entropy"] = json_number(e);
            csv << "# format_version," << kFormatVersion << "\n"
                << config_comment(cfg) << "entropy\n"
                << fmt(e) << "\n";
            plot = "entropy\n" + fmt(e) + "\n";
            summary = "entropy=" + fmt(e);
        } else {
            WassersteinResult r = wasserstein(space, mu, nu, opt.p);
            extra["mode"] = "wasserstein";
            const ordered_json cfg = config_json("transport", g, in, extra);
            doc["format_version"] = kFormatVersion;
            doc["config"] = cfg;
            doc["w"] = r.value;
            doc["p"] = opt.p;
            doc["dual_gap"] = r.dual_gap;
            ordered_json jp = ordered_json::array();
            std::ostringstream rows;
            for (int i = 0; i < space.n(); ++i)
                for (int j = 0; j < space.n(); ++j)
                    if (r.plan.coupling(i, j) > 0.0) {
                        jp.push_back(ordered_json::array(
                            {i, j, r.plan.coupling(i, j)}));
                        rows << i << "," << j << ","
                             << fmt(r.plan.coupling(i, j)) << "\n";
                    }
            doc["plan"] = std::move(jp);
            csv << "# format_version," << kFormatVersion << "\n"
                << config_comment(cfg) << "# w," << fmt(r.value) << ",p,"
                << opt.p << ",dual_gap," << fmt(r.dual_gap) << "\n"
                << "i,j,mass\n"
                << rows.str();
            plot = "i,j,mass\n" + rows.str();
            summary = "W" + std::to_string(opt.p) + "=" + fmt(r.value) +
                      " gap=" + fmt(r.dual_gap);
        }
    }

    emit(g, doc, csv.str());
    if (!g.plot.empty()) write_text_file(g.plot, plot);
    std::cout << summary << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// cd
// --------------------------------------------------------------------------

struct CdOpts {
    int point = -1; // -1 means every admissible point
    std::string N = "inf";
};

int cmd_cd(const GlobalOpts& g, const InputOpts& in, const CdOpts& opt) {
    BuiltInput built = build_input(in, g.seed, true);
    for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
    if (!built.L) {
        if (!built.points.empty()) {
            KernelOperator k =
                pointcloud_generator(built.points, kernel_config(in));
            built.L = std::move(k.L);
        } else {
            fail(ErrorCode::InvalidInput, "cd needs an operator input");
        }
    }
    const Generator& L = *built.L;

    double N = std::numeric_limits<double>::infinity();
    if (opt.N != "inf" && opt.N != "infinity") {
        try {
            N = std::stod(opt.N);
        } catch (...) {
            fail(ErrorCode::InvalidInput, "cannot parse --N '" + opt.N + "'");
        }
    }

    std::vector<int> pts;
    if (opt.point >= 0) {
        if (opt.point >= L.n())
            fail(ErrorCode::InvalidInput, "point index out of range");
        pts.push_back(opt.point);
    } else {
        for (int x = 0; x < L.n(); ++x)
            if (L.is_interior(x)) pts.push_back(x);
    }
    if (pts.empty())
        fail(ErrorCode::NoAdmissiblePairs, "no admissible points");

    std::vector<CDEstimate> est(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        est[i] = cd_estimate(L, pts[i], N);
    double kmin = std::numeric_limits<double>::infinity();
    for (const auto& e : est) kmin = std::min(kmin, e.k);

    ordered_json extra{{"N", opt.N},
                       {"point", opt.point >= 0 ? ordered_json(opt.point)
                                                : ordered_json("all")}};
    const ordered_json cfg = config_json("cd", g, in, extra);
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["config"] = cfg;
    ordered_json jp = ordered_json::array();
    for (const auto& e : est)
        jp.push_back(ordered_json{{"x", e.point}, {"k", json_number(e.k)}});
    doc["points"] = std::move(jp);
    doc["k_min"] = json_number(kmin);

    std::ostringstream rows;
    for (const auto& e : est) rows << e.point << "," << fmt(e.k) << "\n";
    std::ostringstream csv;
    csv << "# format_version," << kFormatVersion << "\n"
        << config_comment(cfg) << "# k_min," << fmt(kmin) << "\n"
        << "x,k\n"
        << rows.str();
    emit(g, doc, csv.str());
    if (!g.plot.empty()) write_text_file(g.plot, "x,k\n" + rows.str());

    std::cout << "k_min=" << fmt(kmin) << " N=" << opt.N
              << " points=" << pts.size() << "\n";
    return 0;
}

void add_input_flags(CLI::App* cmd, InputOpts& in) {
    cmd->add_option("--graph", in.graph, "edge-list file: u v [w]");
    cmd->add_option("--cloud", in.cloud, "point-cloud CSV, one point per row");
    cmd->add_option("--matrix", in.matrix, "distance-matrix CSV");
    cmd->add_option("--operator", in.op,
                    "generator file (dense CSV or 'i j value' list)");
    cmd->add_option("--measure", in.measure,
                    "reference measure CSV (index,weight)");
    cmd->add_option("--geometry", in.geometry,
                    "closed-form model: euclidean:n, sphere:n:R, "
                    "torus:n:p1,..,pn, ou:n");
    cmd->add_option("--sample", in.sample, "sampler for --geometry: "
                                           "fibonacci:N, grid:N, "
                                           "random:N[:seed=s]");
    cmd->add_option("--kind", in.kind,
                    "generator kind for --operator input (markov, grid, "
                    "kernel, custom)");
    cmd->add_option("--bandwidth", in.bandwidth, "kernel bandwidth t");
    cmd->add_option("--cutoff", in.cutoff,
                    "kernel cutoff radius (default 6*sqrt(t))");
    cmd->add_option("--normalization", in.normalization,
                    "kernel normalization: laplace-beltrami or fokker-planck");
    cmd->add_flag("--weighted", in.weighted,
                  "use edge weights as path lengths; on ou:n, probe the "
                  "weighted Laplacian");
    cmd->add_flag("--asymmetric", in.asymmetric,
                  "accept an asymmetric distance matrix");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse Ricci curvature on finite metric measure spaces"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--format", g.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", g.seed, "RNG seed for sampling");
    app.add_option("--threads", g.threads, "worker count (0 = cores)");
    app.add_option("--tol", g.tol, "tolerance for pass/fail commands");
    app.add_option("--out", g.out, "report path ('-' = stdout)");
    app.add_option("--emit-plot-data", g.plot,
                   "write tidy observation CSV to this path");

    InputOpts in;
    RicOpts ric;
    RecoverOpts rec;
    CompareOpts cmp;
    AuditOpts aud;
    TransportOpts tra;
    CdOpts cd;

    CLI::App* c_ric = app.add_subcommand("ric", "coarse Ricci pair scan");
    c_ric->fallthrough();
    add_input_flags(c_ric, in);
    c_ric->add_option("--pairs", ric.pairs,
                      "all, random:k[:seed=s], or maxdist:r");
    c_ric->add_flag("--symmetrize", ric.symmetrize,
                    "average the two pair orientations");

    CLI::App* c_rec =
        app.add_subcommand("recover", "Ricci recovery from curve second "
                                      "derivatives");
    c_rec->fallthrough();
    add_input_flags(c_rec, in);
    c_rec->add_option("--probes", rec.probes, "number of random probes");
    c_rec->add_option("--method", rec.method, "fd or richardson");
    c_rec->add_option("--step", rec.h, "finite-difference step");

    CLI::App* c_cmp = app.add_subcommand(
        "compare", "coarse Ricci vs one-step transport curvature");
    c_cmp->fallthrough();
    add_input_flags(c_cmp, in);
    c_cmp->add_option("--pairs", cmp.pairs,
                      "all, random:k[:seed=s], or maxdist:r");
    c_cmp->add_option("--step", cmp.step, "one-step kernel: lazy or semigroup");
    c_cmp->add_option("--t", cmp.t, "semigroup time for --step semigroup");

    CLI::App* c_aud = app.add_subcommand(
        "audit", "log-Sobolev and gradient-vs-distance checks");
    c_aud->fallthrough();
    add_input_flags(c_aud, in);
    c_aud->add_option("--pairs", aud.pairs,
                      "all, random:k[:seed=s], or maxdist:r");
    c_aud->add_option("--K", aud.K, "log-Sobolev constant (default: estimate)");
    c_aud->add_option("--trials", aud.trials, "number of random probes");

    CLI::App* c_tra =
        app.add_subcommand("transport", "Wasserstein distances and friends");
    c_tra->fallthrough();
    add_input_flags(c_tra, in);
    c_tra->add_option("--mu", tra.mu, "source measure CSV");
    c_tra->add_option("--nu", tra.nu, "target measure CSV");
    c_tra->add_option("--p", tra.p, "transport order, 1 or 2");
    c_tra->add_flag("--entropy", tra.entropy_mode, "relative entropy mode");
    c_tra->add_flag("--kappa", tra.kappa_mode, "one-step curvature mode");
    c_tra->add_flag("--contract", tra.contract_mode,
                    "semigroup contraction-rate mode");
    c_tra->add_option("--x", tra.x, "source point index");
    c_tra->add_option("--y", tra.y, "target point index");
    c_tra->add_option("--step", tra.step, "kappa kernel: lazy or semigroup");
    c_tra->add_option("--t", tra.t, "semigroup time for --step semigroup");
    c_tra->add_option("--tmin", tra.tmin, "contraction grid start");
    c_tra->add_option("--tmax", tra.tmax, "contraction grid end");
    c_tra->add_option("--tsteps", tra.tsteps, "contraction grid size");

    CLI::App* c_cd =
        app.add_subcommand("cd", "pointwise curvature-dimension constants");
    c_cd->fallthrough();
    add_input_flags(c_cd, in);
    c_cd->add_option("--point", cd.point, "single point index (default: all)");
    c_cd->add_option("--N", cd.N, "dimension parameter, number or inf");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_num_threads(g.threads);
        if (c_ric->parsed()) return cmd_ric(g, in, ric);
        if (c_rec->parsed()) return cmd_recover(g, in, rec);
        if (c_cmp->parsed()) return cmd_compare(g, in, cmp);
        if (c_aud->parsed()) return cmd_audit(g, in, aud);
        if (c_tra->parsed()) return cmd_transport(g, in, tra);
        if (c_cd->parsed()) return cmd_cd(g, in, cd);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.input_error() ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
