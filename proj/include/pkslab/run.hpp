#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pkslab/diagnostics.hpp"

namespace pkslab {

struct RunResult {
    std::vector<NormRecord> records;
    SimState final_state;
    EnergyLedger ledger;
    Status status = Status::running;
    std::string reason;
    bool fit_ok = false;
    FitResult fit;
    std::string fit_error;
    double initial_functional = 0.0;
    double max_functional_ratio = 0.0;
    double initial_n_linf = 0.0;
    double mass0 = 0.0;
    double mass_drift = 0.0;       // max relative drift over records
    double max_div_res = 0.0;
    double max_pythagoras = 0.0;
    double max_velocity_identity = 0.0;
    double max_split_residual = 0.0;
    long steps = 0;
    long rejected = 0;
    long positivity_events = 0;
    long clip_events = 0;
    double worst_negativity = 0.0;
};

// Called on each record as it is produced; may throw to abort (I/O errors surface here).
using RecordSink = std::function<void(const NormRecord&)>;

RunResult run_simulation(const SimConfig& cfg, const RecordSink& sink = {});

}  // namespace pkslab
