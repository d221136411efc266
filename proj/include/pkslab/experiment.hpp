#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pkslab/ode.hpp"
#include "pkslab/run.hpp"
#include "pkslab/verify.hpp"

namespace pkslab {

using json = nlohmann::ordered_json;

extern const char* const kVersion;

// run CSV, fixed column order
const std::vector<std::string>& run_csv_columns();
std::string run_csv_header();
std::string run_csv_row(const NormRecord& r);

struct Manifest {
    std::string command;
    SimConfig config;
    std::string start_time, end_time;  // UTC ISO-8601
    std::string status;
    std::vector<std::string> files;
    json to_json() const;
};
std::string utc_now();

struct Check {
    std::string name;
    double value = 0.0, tolerance = 0.0;
    bool asserted = true;
    bool pass = true;
};
// conservation and consistency checks of one finished run
std::vector<Check> run_checks(const RunResult& r);
bool all_pass(const std::vector<Check>& cs);
json checks_json(const std::vector<Check>& cs);
json report_json(const VerificationReport& r);

json final_json(const RunResult& r);
json fit_json(const RunResult& r);
json summary_json(const Manifest& m, const RunResult& r, const std::vector<Check>& checks);

// Sweeps. Per-member failures land in the status column.
struct SweepRow {
    std::string value;
    std::string status;
    std::string reason;
    double fit_rate = NAN, fit_r2 = NAN;
    double mass_drift = NAN, max_functional_ratio = NAN, n_linf_ratio = NAN;
    double E[5] = {NAN, NAN, NAN, NAN, NAN};
    long steps = 0;
    // ODE model members
    double h_star = NAN, sup_h = NAN;
    std::string mass_class;  // init.mass sweeps only
    std::string dir;         // per-member output directory, relative to the sweep root
};

enum class SweepModel { pde, ode };

struct SweepOptions {
    std::string param;
    std::vector<std::string> values;
    SweepModel model = SweepModel::pde;
    int threads = 1;
    std::string out_dir;  // empty: nothing written per member
};

std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepOptions& opt);
std::string sweep_csv(const std::vector<SweepRow>& rows, const SweepOptions& opt);

// ODE outputs
std::string ode_trajectory_csv(const OdeTrajectory& tr);
std::string portrait_csv(const std::vector<PortraitSample>& ps);
std::string kernel_csv(const std::vector<KernelRow>& rows);

// Write a whole file; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace pkslab
