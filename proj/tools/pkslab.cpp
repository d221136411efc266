// pkslab command-line front end.
// exit codes: 0 ok, 1 status mismatch or failed check, 2 usage / config error

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pkslab/experiment.hpp"

using namespace pkslab;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct Common {
    std::string config;
    std::vector<std::string> set;
    std::string out_dir = "out";
    std::string expect = "finished";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "config file (section.key = value)");
    app->add_option("--set", c.set, "override, key=value (repeatable)")->allow_extra_args(false);
    app->add_option("--out-dir", c.out_dir, "output directory");
    app->add_option("--expect", c.expect, "expected run status: finished, blowup, unresolved, any")
        ->check(CLI::IsMember({"finished", "blowup", "unresolved", "any"}));
    app->add_option("--seed", c.seed, "RNG seed");
    app->add_option("--threads", c.threads, "worker threads (fallback: PKSLAB_THREADS)")->check(CLI::PositiveNumber);
}

SimConfig load(const Common& c) {
    SimConfig cfg = c.config.empty() ? SimConfig{} : parse_config_file(c.config);
    cfg = parse_config_pairs(c.set, cfg);
    if (c.seed) {
        cfg.init.seed = *c.seed;
        cfg.verify.seed = *c.seed;
    }
    return cfg;
}

int resolve_threads(const Common& c) {
    if (c.threads) return *c.threads;
    if (const char* env = std::getenv("PKSLAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw ConfigError(std::string("bad PKSLAB_THREADS '") + env + "'");
        return int(v);
    }
    return 1;
}

std::string out_path(const Common& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

bool status_matches(const std::string& expect, const std::string& got) { return expect == "any" || expect == got; }

int cmd_simulate(const Common& c) {
    SimConfig cfg = load(c);
    cfg.validate();
    Manifest m;
    m.command = "simulate";
    m.config = cfg;
    m.start_time = utc_now();
    m.files = {"run.csv", "config.txt"};

    write_file(out_path(c, "config.txt"), emit_config(cfg));
    const std::string csv_path = out_path(c, "run.csv");
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    csv << run_csv_header();
    std::size_t rows = 0;
    // the final record's status is only known at the end, so hold one row back
    std::optional<NormRecord> pending;
    RunResult r = run_simulation(cfg, [&](const NormRecord& rec) {
        if (pending) {
            csv << run_csv_row(*pending);
            csv.flush();
            ++rows;
        }
        pending = rec;
    });
    if (pending) {
        NormRecord last = *pending;
        last.status = r.records.back().status;
        csv << run_csv_row(last);
        ++rows;
    }
    csv.close();
    if (!csv) throw std::runtime_error("write failed: " + csv_path);

    const auto checks = run_checks(r);
    m.end_time = utc_now();
    m.status = to_string(r.status);
    write_file(out_path(c, "summary.json"), summary_json(m, r, checks).dump(2) + "\n");

    const auto& f = r.records.back();
    std::printf("status=%s t=%s steps=%ld rows=%zu n_linf=%s", m.status.c_str(), fmt_double(f.t).c_str(), r.steps, rows,
                fmt_double(f.n_linf).c_str());
    if (r.fit_ok) std::printf(" rate=%s r2=%s", fmt_double(r.fit.rate).c_str(), fmt_double(r.fit.r2).c_str());
    if (!r.reason.empty()) std::printf(" reason=\"%s\"", r.reason.c_str());
    std::printf("\n");
    bool ok = true;
    for (const auto& ch : checks)
        if (ch.asserted && !ch.pass) {
            std::printf("check failed: %s = %s > %s\n", ch.name.c_str(), fmt_double(ch.value).c_str(),
                        fmt_double(ch.tolerance).c_str());
            ok = false;
        }
    if (!status_matches(c.expect, m.status)) {
        std::printf("expected status %s, got %s\n", c.expect.c_str(), m.status.c_str());
        ok = false;
    }
    return ok ? kOk : kFail;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<std::string>& values,
              const std::string& model) {
    SimConfig cfg = load(c);
    SweepOptions opt;
    opt.param = param;
    opt.values = values;
    opt.model = model == "ode" ? SweepModel::ode : SweepModel::pde;
    opt.threads = resolve_threads(c);
    fs::create_directories(c.out_dir);
    opt.out_dir = c.out_dir;
    Manifest m;
    m.command = "sweep " + param;
    m.config = cfg;
    m.start_time = utc_now();
    auto rows = run_sweep(cfg, opt);
    write_file(out_path(c, "sweep.csv"), sweep_csv(rows, opt));
    m.files = {"sweep.csv"};
    bool ok = true;
    for (const auto& r : rows) {
        if (!r.dir.empty()) m.files.push_back(r.dir + "/run.csv");
        std::printf("%s=%s status=%s", param.c_str(), r.value.c_str(), r.status.c_str());
        if (!std::isnan(r.fit_rate)) std::printf(" rate=%s", fmt_double(r.fit_rate).c_str());
        if (!std::isnan(r.h_star)) std::printf(" h_star=%s sup_h=%s", fmt_double(r.h_star).c_str(), fmt_double(r.sup_h).c_str());
        if (!r.mass_class.empty()) std::printf(" class=%s", r.mass_class.c_str());
        if (!r.reason.empty()) std::printf(" reason=\"%s\"", r.reason.c_str());
        std::printf("\n");
        if (!status_matches(c.expect, r.status)) ok = false;
    }
    m.end_time = utc_now();
    m.status = ok ? "finished" : "mismatch";
    write_file(out_path(c, "manifest.json"), m.to_json().dump(2) + "\n");
    return ok ? kOk : kFail;
}

void print_report(const VerificationReport& r) {
    for (const auto& ch : r.checks)
        std::printf("%s %-36s worst=%s tol=%s n=%d%s\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(),
                    fmt_double(ch.worst).c_str(), fmt_double(ch.tolerance).c_str(), ch.samples,
                    ch.asserted ? "" : " (cap)");
}

int cmd_verify(const Common& c, const std::string& suite) {
    SimConfig cfg = load(c);
    Manifest m;
    m.command = "verify " + suite;
    m.config = cfg;
    m.start_time = utc_now();
    VerificationReport r = run_suite(suite, cfg);
    m.end_time = utc_now();
    m.status = r.pass() ? "pass" : "fail";
    m.files = {"verify.json"};
    json j = report_json(r);
    j["manifest"] = m.to_json();
    write_file(out_path(c, "verify.json"), j.dump(2) + "\n");
    print_report(r);
    return r.pass() ? kOk : kFail;
}

int cmd_kernel(const Common& c, const std::vector<double>& k, std::optional<double> A, std::optional<double> b) {
    SimConfig cfg = load(c);
    if (!k.empty()) {
        cfg.kernel.k1 = k[0];
        cfg.kernel.k2 = k[1];
        cfg.kernel.k3 = k[2];
    }
    if (A) cfg.kernel.A = *A;
    if (b) cfg.kernel.b = *b;
    const KernelConfig& kc = cfg.kernel;
    if (kc.k1 == 0.0) throw ConfigError("kernel: k1 must be non-zero");
    if (!(kc.A >= 1.0)) throw ConfigError("kernel: A must be >= 1");
    if (kc.nt < 2) throw ConfigError("kernel: nt must be >= 2");
    std::vector<double> t;
    for (int i = 0; i < kc.nt; ++i) t.push_back(kc.t_max * i / (kc.nt - 1));
    auto rows = kernel_table(kc.k1, kc.k2, kc.k3, kc.A, kc.b, t);
    auto rep = kernel_decay_check(kc.k1, kc.k2, kc.k3, kc.A, kc.b, t);
    Manifest m;
    m.command = "kernel";
    m.config = cfg;
    m.start_time = m.end_time = utc_now();
    m.status = rep.pass() ? "pass" : "fail";
    m.files = {"kernel.csv", "kernel.json"};
    write_file(out_path(c, "kernel.csv"), kernel_csv(rows));
    json j = report_json(rep);
    j["constant"] = affine_constant(kc.k1, kc.A, kc.b);
    j["argmax"] = affine_argmax(kc.k1, kc.A, kc.b);
    j["manifest"] = m.to_json();
    write_file(out_path(c, "kernel.json"), j.dump(2) + "\n");
    std::printf("%-10s %-22s %-22s %s\n", "t", "r1", "amplitude", "bound");
    const std::size_t every = std::max<std::size_t>(1, rows.size() / 20);
    for (std::size_t i = 0; i < rows.size(); i += every)
        std::printf("%-10s %-22s %-22s %s\n", fmt_double(rows[i].t).c_str(), fmt_double(rows[i].r1).c_str(),
                    fmt_double(rows[i].amplitude).c_str(), fmt_double(rows[i].bound).c_str());
    print_report(rep);
    return rep.pass() ? kOk : kFail;
}

int cmd_ode(const Common& c, std::optional<double> m1, std::optional<double> h0, std::optional<double> A,
            std::optional<double> c1) {
    SimConfig cfg = load(c);
    if (m1) cfg.ode.m1 = *m1;
    if (h0) cfg.ode.h0 = *h0;
    if (A) cfg.ode.A = *A;
    if (c1) cfg.ode.c1 = *c1;
    OdeParams p = ode_params(cfg);
    p.validate();
    if (cfg.ode.h0 < 0.0) throw ConfigError("ode: h0 must be >= 0");
    OdeTrajectory tr = integrate_ode(cfg.ode.h0, p, cfg.ode.t_max);
    const double hs = tr.eq.h_star;
    const double hi = std::max({1.5 * hs, 1.2 * cfg.ode.h0, 1e-12});
    auto portrait = phase_portrait_grid(p, 0.0, hi, cfg.ode.portrait_samples);
    const double limit = std::max(cfg.ode.h0, hs) + 1e-9;

    Manifest m;
    m.command = "ode";
    m.config = cfg;
    m.start_time = m.end_time = utc_now();
    const bool ok = tr.sup <= limit;
    m.status = ok ? "pass" : "fail";
    m.files = {"ode_trajectory.csv", "ode_portrait.csv"};
    write_file(out_path(c, "ode_trajectory.csv"), ode_trajectory_csv(tr));
    write_file(out_path(c, "ode_portrait.csv"), portrait_csv(portrait));
    json j;
    j["manifest"] = m.to_json();
    j["equilibrium"] = {{"h_star", hs}, {"h_2star", tr.eq.h_2star}, {"stable", tr.eq.stable}, {"degenerate", tr.eq.degenerate}};
    j["final"] = {{"t", tr.t.back()}, {"h", tr.h.back()}, {"sup", tr.sup}, {"inf", tr.inf}};
    j["checks"] = json::array({{{"name", "sup_bound"}, {"value", tr.sup}, {"tolerance", limit}, {"pass", ok}}});
    write_file(out_path(c, "ode_summary.json"), j.dump(2) + "\n");
    std::printf("h_star=%s h0=%s h_final=%s sup=%s t_final=%s samples=%zu\n", fmt_double(hs).c_str(),
                fmt_double(cfg.ode.h0).c_str(), fmt_double(tr.h.back()).c_str(), fmt_double(tr.sup).c_str(),
                fmt_double(tr.t.back()).c_str(), tr.t.size());
    if (cfg.ode.h0 == 0.0 && !tr.eq.degenerate)
        std::printf("note: h = 0 is itself an equilibrium; any h0 > 0 relaxes to h_star\n");
    if (!ok) std::printf("bound violated: sup %s > %s\n", fmt_double(tr.sup).c_str(), fmt_double(limit).c_str());
    return ok ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pkslab: sheared Keller-Segel / Navier-Stokes lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common sim, swp, ver, ker, ode;
    auto* s_sim = app.add_subcommand("simulate", "run one simulation");
    add_common(s_sim, sim);

    auto* s_swp = app.add_subcommand("sweep", "run a one-parameter sweep");
    add_common(s_swp, swp);
    std::string param, model = "pde";
    std::vector<std::string> values;
    s_swp->add_option("--param", param, "dotted config key")->required();
    s_swp->add_option("--values", values, "values (space or comma separated)")->required()->delimiter(',');
    s_swp->add_option("--model", model, "pde or ode")->check(CLI::IsMember({"pde", "ode"}));

    auto* s_ver = app.add_subcommand("verify", "run verification suites");
    add_common(s_ver, ver);
    std::string suite = "all";
    s_ver->add_option("--suite", suite, "gn, nash, elliptic, velocity, aniso, kernel, spacetime, all");

    auto* s_ker = app.add_subcommand("kernel", "sheared heat kernel decay table");
    add_common(s_ker, ker);
    std::vector<double> kvec;
    std::optional<double> kA, kb;
    s_ker->add_option("--k", kvec, "k1 k2 k3")->expected(3);
    s_ker->add_option("--A", kA, "flow amplitude");
    s_ker->add_option("--b", kb, "weight exponent b");

    auto* s_ode = app.add_subcommand("ode", "zero-mode ODE trajectory and phase portrait");
    add_common(s_ode, ode);
    std::optional<double> m1, h0, oA, c1;
    s_ode->add_option("--m1", m1, "zonal mass M1");
    s_ode->add_option("--h0", h0, "initial value");
    s_ode->add_option("--A", oA, "flow amplitude");
    s_ode->add_option("--c1", c1, "constant c1 in (0, 2 sqrt 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*s_sim) return cmd_simulate(sim);
        if (*s_swp) return cmd_sweep(swp, param, values, model);
        if (*s_ver) return cmd_verify(ver, suite);
        if (*s_ker) return cmd_kernel(ker, kvec, kA, kb);
        if (*s_ode) return cmd_ode(ode, m1, h0, oA, c1);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFail;
    }
    return kUsage;
}
