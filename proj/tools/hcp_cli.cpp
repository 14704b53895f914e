// hcp: exact potential theory of the hypercube walk and its lumped chains from the command line.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcp/bounds.hpp"
#include "hcp/checks.hpp"
#include "hcp/cube.hpp"
#include "hcp/montecarlo.hpp"
#include "hcp/report.hpp"
#include "hcp/solver.hpp"

using namespace hcp;
using nlohmann::json;

namespace {

constexpr std::size_t hypercube_limit = 24;
constexpr double lumped_limit = 5e6;
// Full lumped solves in verify stop here; above it the escape window goes through the local bracket.
constexpr std::size_t verify_full_solve_limit = 40000;

/// Everything that determines a run; stored as the report's inputs so a report can be replayed.
struct Spec {
    std::string command;
    std::size_t N = 0;
    std::string classes;
    std::string xi;
    std::vector<std::string> set;
    std::string start;
    double kappa0 = 4;
    double alpha0 = 1.0 / 20;
    std::uint64_t seed = 1;
    std::size_t replicas = 1000;
    double max_steps = 1e8;
    std::vector<std::string> only;
    std::vector<double> u;
    bool accelerated = false;

    json to_json() const {
        return {{"command", command}, {"N", N},           {"classes", classes}, {"xi", xi},         {"set", set},
                {"start", start},     {"kappa0", kappa0}, {"alpha0", alpha0},   {"seed", seed},     {"replicas", replicas},
                {"max_steps", max_steps}, {"only", only}, {"u", u},             {"accelerated", accelerated}};
    }

    static Spec from_json(const json& j) {
        Spec s;
        s.command = j.at("command").get<std::string>();
        s.N = j.at("N").get<std::size_t>();
        s.classes = j.at("classes").get<std::string>();
        s.xi = j.at("xi").get<std::string>();
        s.set = j.at("set").get<std::vector<std::string>>();
        s.start = j.at("start").get<std::string>();
        s.kappa0 = j.at("kappa0").get<double>();
        s.alpha0 = j.at("alpha0").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.replicas = j.at("replicas").get<std::size_t>();
        s.max_steps = j.at("max_steps").get<double>();
        s.only = j.at("only").get<std::vector<std::string>>();
        s.u = j.at("u").get<std::vector<double>>();
        s.accelerated = j.at("accelerated").get<bool>();
        return s;
    }

    BoundParams params() const {
        BoundParams bp;
        bp.kappa0 = kappa0;
        bp.alpha0 = alpha0;
        bp.validate();
        return bp;
    }
};

/// The instance a spec describes: a partition (trivial when --classes is absent), xi, targets and start.
struct Instance {
    std::size_t N = 0;
    std::optional<Partition> partition;
    SpinConfig xi;
    SpinSet A;
    std::optional<SpinConfig> start;
};

Instance build_instance(const Spec& s) {
    Instance in;
    in.N = s.N;
    if (!s.classes.empty()) {
        in.partition = Partition::parse(s.classes, s.N);
        if (in.N && in.partition->N() != in.N) throw invalid_input("--classes covers a different N than --N");
        in.N = in.partition->N();
    }
    if (!s.set.empty()) {
        std::vector<SpinConfig> pts;
        for (const auto& line : s.set) pts.push_back(SpinConfig::parse_any(line, in.N));
        in.A = SpinSet(pts);
        if (in.N == 0) in.N = in.A.dimension();
        if (in.A.dimension() != in.N) throw invalid_input("set points have a different N");
    }
    if (in.N == 0) throw invalid_input("instance needs --N, --classes or --set-file");
    in.xi = s.xi.empty() ? SpinConfig::all_plus(in.N) : SpinConfig::parse_any(s.xi, in.N);
    if (!s.start.empty()) in.start = SpinConfig::parse_any(s.start, in.N);
    return in;
}

void guard_hypercube(std::size_t N) {
    if (N > hypercube_limit)
        throw too_large("hypercube exact solves are refused above N=" + std::to_string(hypercube_limit) + " (got N=" + std::to_string(N) +
                        "); use --classes for a lumped chain");
}

void guard_lumped(const LumpedChain& c) {
    if (static_cast<double>(c.state_count()) > lumped_limit)
        throw too_large("lumped grid has " + std::to_string(c.state_count()) + " states; exact solves are refused above 5e6");
}

/// Lumped images of the targets; the set must be compatible.
StateSet lumped_targets(const Instance& in, const LumpedChain& c) {
    if (!is_compatible(*in.partition, in.xi, in.A)) throw invalid_input("set is not compatible with the partition relative to xi");
    LumpingMap g(*in.partition, in.xi);
    StateSet out;
    for (const auto& a : in.A) out.push_back(c.index(g(a)));
    return out;
}

bool wanted(const Spec& s, const std::string& group) {
    return s.only.empty() || std::find(s.only.begin(), s.only.end(), group) != s.only.end();
}

const std::vector<std::string> verify_groups = {"kac",  "stirling",   "lumping", "identities", "window", "phi",     "targets",
                                                "uniformity", "mean-time", "laplace", "matthews", "sandwich", "a3", "a4"};

CheckRecord skipped(const std::string& name, const std::string& inst, const std::string& why) {
    CheckRecord r;
    r.name = name;
    r.anchor = "not evaluated";
    r.instance = inst;
    r.hard = false;
    r.regime = "regime not reachable at desk scale";
    r.note = why;
    return r;
}

void verify_lumped(Report& rep, const Spec& s, const Partition& p, const CheckOptions& opt) {
    LumpedChain c(p);
    guard_lumped(c);
    const bool small = c.state_count() <= opt.full_solve_limit;
    const std::string inst = detail::describe(c);
    const std::string why = "grid above the full-solve limit";
    const auto full = c.vertex((std::uint64_t{1} << c.d()) - 1);
    const std::vector<LumpedPoint> J = {c.vertex(0), full};
    if (wanted(s, "kac") || wanted(s, "stirling")) {
        if (small) {
            auto k = check_kac(c, opt);
            if (wanted(s, "kac")) rep.add(k[0]);
            if (wanted(s, "stirling")) rep.add(k[1]);
        } else {
            if (wanted(s, "kac")) rep.add(skipped("kac", inst, why));
        }
    }
    if (wanted(s, "window")) rep.add(check_escape_window(c, full, opt));
    FTable t(p, opt.bp);
    if (wanted(s, "phi")) {
        if (small) rep.add(check_phi(c, full, t, opt));
        else rep.add(skipped("phi", inst, why));
    }
    if (wanted(s, "targets")) {
        if (small) rep.add(check_vertex_targets(c, J, opt));
        else rep.add(skipped("targets", inst, why));
    }
    if (wanted(s, "uniformity")) {
        if (small) rep.add(check_harmonic_uniformity(c, J, t, opt));
        else rep.add(skipped("uniformity", inst, why));
    }
    if (wanted(s, "mean-time")) {
        if (small) rep.add(check_mean_time_window(c, J, opt, c.d() == 1 ? 0 : 200));
        else rep.add(skipped("mean-time", inst, why));
    }
    if (small) {
        LumpedView v(c);
        if (wanted(s, "laplace")) rep.add(check_laplace_limit(c, c.origin_index(), full, opt));
        if (wanted(s, "matthews")) {
            std::size_t near = c.index(full);
            v.for_each_neighbor(c.index(full), [&](std::size_t j, double) { near = j; });
            rep.add(check_matthews(c, near, full, opt));
            rep.add(check_matthews(c, c.origin_index(), full, opt));
        }
        if (wanted(s, "sandwich")) {
            rep.add(check_sandwich(c, full, {c.origin()}, opt));
            rep.add(check_sandwich(c, full, {c.vertex(0)}, opt));
        }
    }
    if (wanted(s, "a3")) rep.add(check_a3(t, opt));
}

void verify_hypercube(Report& rep, const Spec& s, std::size_t N, Rng& rng, std::size_t count, const CheckOptions& opt) {
    guard_hypercube(N);
    if (wanted(s, "lumping"))
        for (std::size_t t = 0; t < count; ++t) {
            auto in = random_lumping_instance(rng, N);
            rep.add(check_lumping(in.partition, in.xi, in.A, in.start, opt));
        }
    if (wanted(s, "identities")) {
        HypercubeView v(N);
        const std::size_t S = v.state_count();
        for (std::size_t t = 0; t < count; ++t) {
            std::size_t y, x, j, o;
            do {
                y = rng.below(S), x = rng.below(S), j = rng.below(S), o = rng.below(S);
            } while (std::set<std::size_t>{y, x, j, o}.size() < 4);
            rep.add(check_identities(v, y, x, {j}, o, {-0.5 / static_cast<double>(S), 0.0}, opt));
        }
    }
}

Report cmd_verify(const Spec& s) {
    for (const auto& g : s.only)
        if (std::find(verify_groups.begin(), verify_groups.end(), g) == verify_groups.end())
            throw invalid_input("unknown check group '" + g + "'");
    Report rep;
    rep.experiment = "verify";
    CheckOptions opt;
    opt.bp = s.params();
    opt.full_solve_limit = verify_full_solve_limit;
    Rng rng(s.seed, 0);
    if (s.N == 0 && s.classes.empty()) {
        for (std::size_t N : {8u, 10u, 12u}) verify_hypercube(rep, s, N, rng, 3, opt);
        for (std::size_t N : {64u, 128u, 256u})
            for (std::size_t d : {1u, 2u, 3u}) verify_lumped(rep, s, Partition::equipartition(N, d), opt);
        if (wanted(s, "a4"))
            for (int t = 0; t < 50; ++t) {
                std::size_t N = 4 + rng.below(13), m = 1 + rng.below(4);
                std::vector<SpinConfig> pts;
                for (std::size_t i = 0; i < m; ++i) pts.push_back(SpinConfig::from_index(rng.below(std::uint64_t{1} << N), N));
                rep.add(check_a4(SpinSet(pts), SpinConfig::all_plus(N), opt));
            }
    } else if (!s.classes.empty()) {
        verify_lumped(rep, s, Partition::parse(s.classes, s.N), opt);
    } else {
        verify_hypercube(rep, s, s.N, rng, 5, opt);
    }
    return rep;
}

Report cmd_solve(const Spec& s) {
    auto in = build_instance(s);
    if (in.A.empty()) throw invalid_input("solve needs a target set (--set-file)");
    if (!in.start) throw invalid_input("solve needs --start");
    if (in.A.contains(*in.start)) throw invalid_input("start lies in the target set");
    Report rep;
    rep.experiment = "solve";
    auto run = [&](const auto& v, std::size_t y, const StateSet& A) {
        auto H = harmonic_measure(v, y, A);
        double sum = 0;
        for (auto h : H.values) sum += h;
        json hm = json::array();
        for (std::size_t i = 0; i < in.A.size(); ++i) hm.push_back({{"point", in.A[i].to_string()}, {"probability", H.values[i]}});
        double m = mean_hitting_time(v, y, A).value;
        double mc = mean_time_by_capacity(v, y, A).value;
        rep.results["harmonic_measure"] = hm;
        rep.results["mean_hitting_time"] = m;
        rep.results["mean_time_by_capacity"] = mc;
        rep.results["escape_probability"] = escape_prob(v, y, A).value;
        json lap = json::array();
        for (double u : s.u) lap.push_back({{"u", u}, {"value", laplace_hitting(v, y, A, u).value}});
        rep.results["laplace"] = lap;
        CheckRecord a;
        a.name = "harmonic-sum";
        a.anchor = "harmonic measure is a probability distribution";
        a.instance = "start=" + in.start->to_string();
        a.exact = sum;
        a.bound = 1;
        a.satisfied = std::fabs(sum - 1) <= 1e-12;
        rep.add(a);
        CheckRecord b = a;
        b.name = "capacity-mean-time";
        b.anchor = "mean hitting time equals the capacity-weighted potential sum";
        b.exact = std::fabs(m - mc) / m;
        b.bound = 1e-10;
        b.satisfied = b.exact <= 1e-10;
        b.note = "exact = relative residual";
        rep.add(b);
    };
    if (in.partition) {
        LumpedChain c(*in.partition);
        guard_lumped(c);
        LumpedView v(c);
        LumpingMap g(*in.partition, in.xi);
        run(v, c.index(g(*in.start)), lumped_targets(in, c));
        rep.results["chain"] = "lumped";
    } else {
        guard_hypercube(in.N);
        HypercubeView v(in.N);
        StateSet A;
        for (const auto& a : in.A) A.push_back(a.to_index());
        run(v, in.start->to_index(), A);
        rep.results["chain"] = "hypercube";
    }
    return rep;
}

std::string format_double(double x) {
    if (!std::isfinite(x)) return "";
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
}

/// Table of F1, F2, F and every closed-form envelope of F2, one row per distance.
std::string bounds_table(const FTable& t) {
    std::vector<std::string> names;
    for (const auto& e : a3_envelopes(t, 1)) names.push_back(e.name);
    std::ostringstream o;
    o << "n,F1,F2,F";
    for (const auto& n : names) o << ',' << n;
    o << ",dominated\n";
    for (std::size_t n = 1; n <= t.N(); ++n) {
        o << n << ',' << format_double(t.F1(n)) << ',' << format_double(t.F2(n)) << ',' << format_double(t.F(n));
        bool dom = true;
        for (const auto& e : a3_envelopes(t, n)) {
            o << ',' << (e.applicable ? format_double(e.value()) : "");
            if (e.applicable && e.rigorous && !e.needs_constant && t.log_F2(n) > e.log_value + 1e-12L) dom = false;
        }
        o << ',' << (dom ? "true" : "false") << '\n';
    }
    return o.str();
}

Report cmd_bounds(const Spec& s, std::string& table) {
    auto in = build_instance(s);
    Partition p = in.partition ? *in.partition : Partition::trivial(in.N);
    FTable t(p, s.params());
    Report rep;
    rep.experiment = "bounds";
    CheckOptions opt;
    opt.bp = s.params();
    rep.add(check_a3(t, opt));
    rep.results["d0"] = d0(p.N(), opt.bp.alpha0);
    table = bounds_table(t);
    return rep;
}

Report cmd_sparseness(const Spec& s) {
    auto in = build_instance(s);
    if (in.A.empty()) throw invalid_input("sparseness needs a target set (--set-file)");
    Partition p = in.partition ? *in.partition : build_partition_from_set(in.A, in.xi);
    Report rep;
    rep.experiment = "sparseness";
    double U = sparseness_U(in.A, p, in.xi, s.params());
    FTable t(p, s.params());
    rep.results["U"] = U;
    rep.results["partition"] = partition_to_json(p);
    rep.results["d"] = p.d();
    rep.results["F_N"] = t.F(p.N());
    rep.results["hypothesis_H"] = hypothesis_H(in.A);
    rep.results["min_distance"] = min_pairwise_distance(in.A);
    return rep;
}

Report cmd_simulate(const Spec& s, const std::string& samples_path) {
    auto in = build_instance(s);
    if (in.A.empty()) throw invalid_input("simulate needs a target set (--set-file)");
    if (!in.start) throw invalid_input("simulate needs --start");
    Report rep;
    rep.experiment = "simulate";
    rep.results["rng"] = Rng::algorithm;
    SimConfig cfg{s.seed, s.replicas, s.max_steps};
    std::vector<HitSample> samples;
    std::optional<double> exact_mean;
    std::vector<std::optional<double>> exact_hit(in.A.size());
    if (in.partition) {
        LumpedChain c(*in.partition);
        LumpedView v(c);
        LumpingMap g(*in.partition, in.xi);
        StateSet A = lumped_targets(in, c);
        std::size_t y = c.index(g(*in.start));
        if (s.accelerated) {
            guard_lumped(c);
            RenewalSampler<LumpedView> rs(v, c.origin_index(), A);
            samples = rs.sample_many(y, cfg);
        } else {
            samples = sample_hitting(v, cfg, y, A);
        }
        // Map hit states back to positions in the set.
        for (auto& h : samples) h.hit_state = static_cast<std::size_t>(std::find(A.begin(), A.end(), h.hit_state) - A.begin());
        if (static_cast<double>(c.state_count()) <= lumped_limit) {
            exact_mean = mean_hitting_time(v, y, A).value;
            auto H = harmonic_measure(v, y, A).values;
            for (std::size_t i = 0; i < A.size(); ++i) exact_hit[i] = H[i];
        }
    } else {
        if (s.accelerated) throw invalid_input("--accelerated needs a lumped chain (--classes)");
        samples = sample_hitting_spins(cfg, *in.start, in.A);
        if (in.N <= hypercube_limit) {
            HypercubeView v(in.N);
            StateSet A;
            for (const auto& a : in.A) A.push_back(a.to_index());
            exact_mean = mean_hitting_time(v, in.start->to_index(), A).value;
            auto H = harmonic_measure(v, in.start->to_index(), A).values;
            for (std::size_t i = 0; i < A.size(); ++i) exact_hit[i] = H[i];
        }
    }
    auto m = mean_time(samples);
    rep.results["mean"] = {{"estimate", m.value}, {"se", m.se}, {"n", m.n}};
    std::size_t cens = 0;
    for (const auto& h : samples) cens += h.censored;
    rep.results["censored"] = cens;
    json hits = json::array();
    for (std::size_t i = 0; i < in.A.size(); ++i) {
        auto f = hit_fraction(samples, {i});
        hits.push_back({{"point", in.A[i].to_string()}, {"estimate", f.value}, {"se", f.se}});
        if (exact_hit[i]) {
            CheckRecord r;
            r.name = "mc-hit-probability";
            r.anchor = "empirical harmonic measure against the exact solve";
            r.instance = in.A[i].to_string();
            r.exact = *exact_hit[i];
            r.bound = 4;
            r.measured = f.sigmas_from(*exact_hit[i]);
            r.satisfied = r.measured <= 4;
            r.note = "measured = distance in standard errors";
            rep.add(r);
        }
    }
    rep.results["hit_fractions"] = hits;
    if (exact_mean) {
        CheckRecord r;
        r.name = "mc-mean";
        r.anchor = "empirical mean hitting time against the exact solve";
        r.instance = "start=" + in.start->to_string();
        r.exact = *exact_mean;
        r.bound = 4;
        r.measured = m.sigmas_from(*exact_mean);
        r.satisfied = cens == 0 && r.measured <= 4;
        r.note = "measured = distance in standard errors";
        rep.add(r);
        if (m.n >= 1000) {
            auto ks = exponentiality_test(samples, *exact_mean);
            CheckRecord e;
            e.name = "exponentiality";
            e.anchor = "hitting time over its mean is asymptotically Exp(1)";
            e.instance = r.instance;
            e.exact = ks.statistic;
            e.bound = ks.threshold;
            e.satisfied = ks.pass;
            e.hard = false;
            e.note = "Kolmogorov-Smirnov distance; threshold calibrated empirically";
            rep.add(e);
        }
    }
    if (!samples_path.empty()) {
        std::ofstream f(samples_path);
        if (!f) throw invalid_input("cannot write " + samples_path);
        f << "time,hit_state,censored\n" << std::setprecision(17);
        for (const auto& h : samples) f << h.time << ',' << h.hit_state << ',' << (h.censored ? 1 : 0) << '\n';
    }
    return rep;
}

Report run(const Spec& s, const std::string& samples_path, std::string& table) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep;
    if (s.command == "verify") rep = cmd_verify(s);
    else if (s.command == "solve") rep = cmd_solve(s);
    else if (s.command == "bounds") rep = cmd_bounds(s, table);
    else if (s.command == "simulate") rep = cmd_simulate(s, samples_path);
    else if (s.command == "sparseness") rep = cmd_sparseness(s);
    else throw invalid_input("unknown command '" + s.command + "'");
    rep.inputs = s.to_json();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Runs independent experiments on up to `workers` threads; an experiment that throws becomes an error entry.
json run_batch(const json& specs, std::size_t workers, bool& ok) {
    if (!specs.is_array()) throw invalid_input("batch spec must be a JSON array");
    std::vector<Spec> list;
    for (const auto& j : specs) list.push_back(Spec::from_json(j.contains("inputs") ? j.at("inputs") : j));
    std::vector<json> out(list.size());
    std::vector<int> status(list.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < list.size();) {
            try {
                std::string table;
                auto rep = run(list[i], "", table);
                out[i] = rep.to_json();
                status[i] = rep.ok() ? 0 : 1;
            } catch (const std::exception& e) {
                out[i] = {{"error", e.what()}, {"inputs", list[i].to_json()}};
                status[i] = 2;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::max<std::size_t>(1, std::min(workers, list.size())); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    ok = std::all_of(status.begin(), status.end(), [](int x) { return x == 0; });
    return out;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw invalid_input("cannot write " + out);
    f << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact hitting probabilities, mean times, Laplace transforms and bounds for the hypercube walk"};
    app.require_subcommand(1);
    Spec s;
    std::string set_file, spec_file, out = "-", format = "json", samples_path;

    auto common = [&](CLI::App* c, bool instance) {
        c->add_option("--spec", spec_file, "Replay the inputs of an earlier JSON report");
        c->add_option("--out", out, "Output path, '-' for stdout");
        c->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--kappa0", s.kappa0, "kappa0 (>= 4)");
        c->add_option("--alpha0", s.alpha0, "alpha0 in (0, 1/20]");
        c->add_option("--seed", s.seed, "Random seed");
        if (!instance) return;
        c->add_option("--N", s.N, "Number of coordinates");
        c->add_option("--classes", s.classes, "Partition: class sizes '3,5' or explicit '[[1,2],[3]]' (1-based)");
        c->add_option("--xi", s.xi, "Reference configuration (+/- string or 0x hex)");
        c->add_option("--set-file", set_file, "Target set: one configuration per line");
        c->add_option("--start", s.start, "Start configuration");
    };
    auto* verify = app.add_subcommand("verify", "Run the theorem checks on the default grid or on one instance");
    common(verify, true);
    verify->add_option("--only", s.only, "Check groups to run (comma separated)")->delimiter(',');
    auto* solve = app.add_subcommand("solve", "Exact hitting quantities for one instance");
    common(solve, true);
    solve->add_option("--u", s.u, "Laplace exponents")->delimiter(',');
    auto* bounds = app.add_subcommand("bounds", "F tables and closed-form envelopes");
    common(bounds, true);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo hitting times");
    common(simulate, true);
    simulate->add_option("--replicas", s.replicas, "Number of independent replicas");
    simulate->add_option("--max-steps", s.max_steps, "Censoring cap per replica");
    simulate->add_flag("--accelerated", s.accelerated, "Renew at the origin and draw failed excursions in bulk");
    simulate->add_option("--samples", samples_path, "Write samples as CSV");
    auto* sparse = app.add_subcommand("sparseness", "Sparseness of a target set");
    common(sparse, true);

    auto* batch = app.add_subcommand("batch", "Run a JSON array of experiment specs in parallel");
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    batch->add_option("--spec", spec_file, "JSON array of specs or reports")->required();
    batch->add_option("--workers", workers, "Worker cap")->check(CLI::PositiveNumber);
    batch->add_option("--out", out, "Output path, '-' for stdout");

    CLI11_PARSE(app, argc, argv);
    try {
        auto* sub = app.get_subcommands().front();
        if (sub == batch) {
            bool ok = true;
            json reports = run_batch(json::parse(read_text_file(spec_file)), workers, ok);
            emit(reports.dump(2) + "\n", out);
            for (const auto& r : reports)
                if (r.contains("error")) std::cerr << "error: " << r.at("error").get<std::string>() << "\n";
            return ok ? 0 : 1;
        }
        if (!spec_file.empty()) {
            auto j = json::parse(read_text_file(spec_file));
            s = Spec::from_json(j.contains("inputs") ? j.at("inputs") : j);
            if (s.command != sub->get_name()) throw invalid_input("spec was written by '" + s.command + "'");
        } else {
            s.command = sub->get_name();
            if (!set_file.empty()) {
                for (const auto& p : read_set_file(set_file, s.N)) s.set.push_back(p.to_string());
            }
        }
        std::string table;
        Report rep = run(s, samples_path, table);
        if (format == "csv") emit(s.command == "bounds" ? table : rep.to_csv(), out);
        else emit(rep.to_json().dump(2) + "\n", out);
        std::cerr << s.command << ": " << rep.checks.size() << " checks, " << rep.hard_failures() << " hard failures, "
                  << rep.envelope_misses() << " envelope misses, hash " << rep.content_hash() << "\n";
        for (const auto& c : rep.checks)
            if (!c.satisfied) std::cerr << (c.hard ? "FAIL " : "warn ") << c.name << " [" << c.instance << "] " << c.note << "\n";
        return rep.ok() ? 0 : 1;
    } catch (const too_large& e) {
        std::cerr << "error: size guard: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
