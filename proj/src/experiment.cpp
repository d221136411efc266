#include "pkslab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace pkslab {

const char* const kVersion = "0.1.0";

namespace {

using Getter = double (*)(const NormRecord&);
struct Column {
    const char* name;
    Getter get;
};

#define PK_COL(f) Column{#f, [](const NormRecord& r) { return r.f; }}
const std::vector<Column>& columns() {
    static const std::vector<Column> cols = {
        PK_COL(t),           PK_COL(mass),         PK_COL(n_linf),       PK_COL(n00_l2),       PK_COL(n0neq_l2),
        PK_COL(dz_n0neq_l2), PK_COL(dzz_n0neq_l2), PK_COL(nneq_l2),      PK_COL(dxx_nneq_l2),  PK_COL(dzz_nneq_l2),
        PK_COL(dxdz_nneq_l2), PK_COL(u10_h2),      PK_COL(u20_h2),       PK_COL(u30_h2),       PK_COL(w2neq_l2),
        PK_COL(lap_u2neq_l2), PK_COL(dxx_u2neq_l2), PK_COL(dxx_u3neq_l2), PK_COL(div_res),     PK_COL(tail_frac),
        PK_COL(E1),          PK_COL(E2),           PK_COL(E3),           PK_COL(E4),           PK_COL(E5),
    };
    return cols;
}
#undef PK_COL

// json has no inf/nan; keep them as strings rather than silently nulling
json num(double v) {
    if (std::isfinite(v)) return v;
    return fmt_double(v);
}

std::string u(double v) { return std::isnan(v) ? "" : fmt_double(v); }

}  // namespace

const std::vector<std::string>& run_csv_columns() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& c : columns()) n.push_back(c.name);
        n.push_back("status");
        return n;
    }();
    return names;
}

std::string run_csv_header() {
    std::string s;
    for (const auto& n : run_csv_columns()) s += (s.empty() ? "" : ",") + n;
    return s + "\n";
}

std::string run_csv_row(const NormRecord& r) {
    std::string s;
    for (const auto& c : columns()) {
        s += fmt_double(c.get(r));
        s += ',';
    }
    return s + r.status + "\n";
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json Manifest::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    json c = json::object();
    for (const auto& [k, v] : config_map(config)) c[k] = v;
    j["config"] = c;
    j["seeds"] = {{"init", config.init.seed}, {"verify", config.verify.seed}};
    j["start_time"] = start_time;
    j["end_time"] = end_time;
    j["status"] = status;
    j["files"] = files;
    return j;
}

std::vector<Check> run_checks(const RunResult& r) {
    std::vector<Check> cs;
    auto add = [&](const char* n, double v, double tol) { cs.push_back({n, v, tol, true, std::isfinite(v) && v <= tol}); };
    add("mass_drift", r.mass_drift, 1e-8);
    add("divergence_residual", r.max_div_res, 1e-10);
    add("mode_pythagoras", r.max_pythagoras, 1e-12);
    add("velocity_identity", r.max_velocity_identity, 1e-10);
    add("split_residual", r.max_split_residual, 1e-10);
    // positivity is monitored only
    cs.push_back({"worst_negativity", r.worst_negativity, 0.0, false, true});
    return cs;
}

bool all_pass(const std::vector<Check>& cs) {
    for (const auto& c : cs)
        if (c.asserted && !c.pass) return false;
    return true;
}

json checks_json(const std::vector<Check>& cs) {
    json a = json::array();
    for (const auto& c : cs)
        a.push_back({{"name", c.name}, {"value", num(c.value)}, {"tolerance", num(c.tolerance)},
                     {"asserted", c.asserted}, {"pass", c.pass}});
    return a;
}

json report_json(const VerificationReport& r) {
    json a = json::array();
    for (const auto& c : r.checks)
        a.push_back({{"name", c.name}, {"asserted", c.asserted}, {"pass", c.pass}, {"worst", num(c.worst)},
                     {"worst_at", c.worst_at}, {"tolerance", num(c.tolerance)}, {"samples", c.samples},
                     {"note", c.note}});
    return {{"suite", r.suite}, {"pass", r.pass()}, {"checks", a}};
}

json final_json(const RunResult& r) {
    const NormRecord& f = r.records.back();
    json j;
    j["status"] = to_string(r.status);
    j["reason"] = r.reason;
    j["t"] = num(f.t);
    j["steps"] = r.steps;
    j["rejected"] = r.rejected;
    j["E"] = {num(f.E1), num(f.E2), num(f.E3), num(f.E4), num(f.E5)};
    j["mass0"] = num(r.mass0);
    j["mass_drift"] = num(r.mass_drift);
    j["n_linf_initial"] = num(r.initial_n_linf);
    j["n_linf_final"] = num(f.n_linf);
    j["blowup_functional_initial"] = num(r.initial_functional);
    j["blowup_functional_max_ratio"] = num(r.max_functional_ratio);
    j["positivity_events"] = r.positivity_events;
    j["clip_events"] = r.clip_events;
    j["worst_negativity"] = num(r.worst_negativity);
    return j;
}

json fit_json(const RunResult& r) {
    if (!r.fit_ok) return {{"rate", nullptr}, {"r2", nullptr}, {"error", r.fit_error}};
    return {{"rate", num(r.fit.rate)}, {"r2", num(r.fit.r2)}, {"samples", r.fit.samples}};
}

json summary_json(const Manifest& m, const RunResult& r, const std::vector<Check>& checks) {
    return {{"manifest", m.to_json()}, {"final", final_json(r)}, {"fit", fit_json(r)}, {"checks", checks_json(checks)}};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
namespace {

SweepRow sweep_member(const SimConfig& base, const SweepOptions& opt, std::size_t i) {
    SweepRow row;
    row.value = opt.values[i];
    try {
        SimConfig cfg = base;
        apply_setting(cfg, opt.param, row.value);
        cfg.validate();
        if (opt.param == "init.mass") row.mass_class = to_string(mass_threshold_check(cfg.init.mass));
        if (opt.model == SweepModel::ode) {
            OdeParams p = ode_params(cfg);
            if (opt.param == "init.mass") p.m1 = cfg.init.mass / (4.0 * M_PI * M_PI);
            p.validate();
            OdeTrajectory tr = integrate_ode(cfg.ode.h0, p, cfg.ode.t_max);
            row.h_star = tr.eq.h_star;
            row.sup_h = tr.sup;
            row.status = "finished";
            return row;
        }
        RunResult r = run_simulation(cfg);
        row.status = to_string(r.status);
        row.reason = r.reason;
        if (r.fit_ok) {
            row.fit_rate = r.fit.rate;
            row.fit_r2 = r.fit.r2;
        }
        row.mass_drift = r.mass_drift;
        row.max_functional_ratio = r.max_functional_ratio;
        double mx = 0.0;
        for (const auto& rec : r.records) mx = std::max(mx, rec.n_linf);
        row.n_linf_ratio = r.initial_n_linf > 0.0 ? mx / r.initial_n_linf : NAN;
        const NormRecord& f = r.records.back();
        const double E[5] = {f.E1, f.E2, f.E3, f.E4, f.E5};
        std::copy(E, E + 5, row.E);
        row.steps = r.steps;
        if (!opt.out_dir.empty()) {
            namespace fs = std::filesystem;
            row.dir = "member_" + std::to_string(i);
            const fs::path d = fs::path(opt.out_dir) / row.dir;
            fs::create_directories(d);
            std::string csv = run_csv_header();
            for (const auto& rec : r.records) csv += run_csv_row(rec);
            write_file((d / "run.csv").string(), csv);
            write_file((d / "config.txt").string(), emit_config(cfg));
        }
    } catch (const std::exception& e) {
        row.status = "error";
        row.reason = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepOptions& opt) {
    if (opt.values.empty()) throw ConfigError("sweep needs at least one value");
    if (opt.param.empty()) throw ConfigError("sweep needs a parameter");
    {
        // reject unknown keys up front rather than per member
        SimConfig probe = base;
        apply_setting(probe, opt.param, get_setting(base, opt.param));
    }
    std::vector<SweepRow> rows(opt.values.size());
    const int nt = std::max(1, std::min<int>(opt.threads, int(rows.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = sweep_member(base, opt, i);
    };
    if (nt == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < nt; ++k) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const SweepOptions& opt) {
    std::ostringstream s;
    const bool ode = opt.model == SweepModel::ode;
    const bool mass = opt.param == "init.mass";
    s << opt.param << ",status";
    if (ode)
        s << ",h_star,sup_h";
    else
        s << ",fit_rate,fit_r2,mass_drift,max_functional_ratio,n_linf_ratio,E1,E2,E3,E4,E5,steps";
    if (mass) s << ",mass_class";
    s << ",reason\n";
    for (const auto& r : rows) {
        s << r.value << ',' << r.status;
        if (ode) {
            s << ',' << u(r.h_star) << ',' << u(r.sup_h);
        } else {
            s << ',' << u(r.fit_rate) << ',' << u(r.fit_r2) << ',' << u(r.mass_drift) << ','
              << u(r.max_functional_ratio) << ',' << u(r.n_linf_ratio);
            for (double e : r.E) s << ',' << u(e);
            s << ',' << r.steps;
        }
        if (mass) s << ',' << r.mass_class;
        std::string reason = r.reason;
        for (char& c : reason)
            if (c == ',' || c == '\n' || c == '"') c = ';';
        s << ',' << reason << '\n';
    }
    return s.str();
}

std::string ode_trajectory_csv(const OdeTrajectory& tr) {
    std::string s = "t,h\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) s += fmt_double(tr.t[i]) + "," + fmt_double(tr.h[i]) + "\n";
    return s;
}

std::string portrait_csv(const std::vector<PortraitSample>& ps) {
    std::string s = "kind,level,h,dhdt\n";
    for (const auto& p : ps)
        s += p.kind + "," + fmt_double(p.level) + "," + fmt_double(p.h) + "," + fmt_double(p.dhdt) + "\n";
    return s;
}

std::string kernel_csv(const std::vector<KernelRow>& rows) {
    std::string s = "t,r1,amplitude,bound\n";
    for (const auto& r : rows)
        s += fmt_double(r.t) + "," + fmt_double(r.r1) + "," + fmt_double(r.amplitude) + "," + fmt_double(r.bound) + "\n";
    return s;
}

}  // namespace pkslab
