#pragma once

#include <optional>
#include <string>

#include "secoff/pdd.hpp"
#include "secoff/types.hpp"

namespace secoff::benchmarks {

enum class Scheme { proposed, secure_oma, fixed_sic, no_eve };

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct BenchmarkResult {
    Scheme scheme = Scheme::proposed;
    Allocation alloc;
    EnergyBreakdown energy;
    FeasibilityReport feasibility;
    pdd::SolveStatus status = pdd::SolveStatus::converged;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double final_violation = 0.0;
    double max_kkt = 0.0;
};

/// Equal-slot TDMA offloading: K independent two-variable problems, each
/// solved by golden-section over the local bits with a power bisection against
/// the secrecy-capped rate inside. Users whose secrecy cap saturates below
/// their requirement compute fully locally.
BenchmarkResult solve_oma(const SystemConfig& cfg, const ChannelRealization& ch);

/// Decoding order frozen to descending channel gains; the double loop
/// degenerates to plain successive approximation with no binary machinery.
BenchmarkResult solve_fixed_sic(const SystemConfig& cfg,
                                const ChannelRealization& ch,
                                const pdd::PddConfig& base = {});

/// No eavesdropper: secrecy chain dropped, confidential rate pinned to the
/// codeword rate, decoding order still optimized.
BenchmarkResult solve_no_eve(const SystemConfig& cfg, const ChannelRealization& ch,
                             const pdd::PddConfig& base = {});

/// The full design, wrapped for uniform dispatch.
BenchmarkResult solve_proposed(const SystemConfig& cfg,
                               const ChannelRealization& ch,
                               const pdd::PddConfig& base = {});

BenchmarkResult solve_scheme(Scheme scheme, const SystemConfig& cfg,
                             const ChannelRealization& ch,
                             const pdd::PddConfig& base = {});

}  // namespace secoff::benchmarks
