#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>

#include "ratings/model.hpp"

namespace ratings {

struct IntegrationOptions {
    // Snapshots kept in the trajectory (initial and final state always included).
    std::size_t max_snapshots = 4097;
    int max_halvings = 20;
};

/// min(0.01/delta, 0.01/(alpha psi_max)).
double default_step(const QueuePair& queues, const MarketParams& params);

/// Classical 4-stage Runge-Kutta integration of the seller flow equations at
/// fixed queues. Throws StepTooLarge when a mass turns negative even after
/// max_halvings step halvings.
FlowTrajectory integrate_flows(const SteadyState& initial, const QueuePair& queues,
                               const MarketParams& params, double horizon, double step,
                               const IntegrationOptions& options = {});

/// Time-averaged occupancy of a finite seller population.
struct PopulationEstimate {
    SteadyState occupancy;              // normalized to seller mass 1
    std::array<double, 4> std_error{};  // batch-means standard errors, same order
    Beliefs beliefs;
    std::uint64_t events = 0;
    std::size_t batches = 0;
};

/// Event-driven simulation of n sellers at fixed queues. Each seller switches
/// type at rate delta, meets a buyer at rate psi(lambda of her rating), and on
/// a meeting has her rating reset to her true type with probability alpha.
/// The first half of the horizon is discarded; the second half is split into
/// `batches` batches for the standard errors. Deterministic given the seed.
PopulationEstimate simulate_population(std::size_t n, const QueuePair& queues,
                                       const MarketParams& params, double horizon,
                                       std::uint64_t seed, std::size_t batches = 20);

/// CSV with header time,p_hg,p_lg,p_hb,p_lb and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const FlowTrajectory& trajectory);

}  // namespace ratings
