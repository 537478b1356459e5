#pragma once

#include <stdexcept>
#include <string>

namespace qpsl2 {

enum class Errc {
    cone_violation,
    not_unimodular,
    pole,
    grid_too_coarse,
    nonzero_degree,
    no_hyperbolicity,
    rational_stop,
    depth_limit,
    parity,
    not_unimodular_basis,
    depth_exhausted,
    underflow,
    cone_escape,
    nonconstant,
    small_divisor,
    step_too_large,
    diverged,
    resonance_hit,
    not_elliptic,
    no_zero_found,
    zeros_coincide,
    no_contraction,
    branch_fault,
    section_collapse,
    config_invalid,
    command_failed,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::cone_violation: return "CONE_VIOLATION";
        case Errc::not_unimodular: return "NOT_UNIMODULAR";
        case Errc::pole: return "POLE";
        case Errc::grid_too_coarse: return "GRID_TOO_COARSE";
        case Errc::nonzero_degree: return "NONZERO_DEGREE";
        case Errc::no_hyperbolicity: return "NO_HYPERBOLICITY";
        case Errc::rational_stop: return "RATIONAL_STOP";
        case Errc::depth_limit: return "DEPTH_LIMIT";
        case Errc::parity: return "PARITY";
        case Errc::not_unimodular_basis: return "NOT_UNIMODULAR_BASIS";
        case Errc::depth_exhausted: return "DEPTH_EXHAUSTED";
        case Errc::underflow: return "UNDERFLOW";
        case Errc::cone_escape: return "CONE_ESCAPE";
        case Errc::nonconstant: return "NONCONSTANT";
        case Errc::small_divisor: return "SMALL_DIVISOR";
        case Errc::step_too_large: return "STEP_TOO_LARGE";
        case Errc::diverged: return "DIVERGED";
        case Errc::resonance_hit: return "RESONANCE_HIT";
        case Errc::not_elliptic: return "NOT_ELLIPTIC";
        case Errc::no_zero_found: return "NO_ZERO_FOUND";
        case Errc::zeros_coincide: return "ZEROS_COINCIDE";
        case Errc::no_contraction: return "NO_CONTRACTION";
        case Errc::branch_fault: return "BRANCH_FAULT";
        case Errc::section_collapse: return "SECTION_COLLAPSE";
        case Errc::config_invalid: return "CONFIG_INVALID";
        case Errc::command_failed: return "COMMAND_FAILED";
    }
    return "UNKNOWN";
}

// Library errors carry a code plus an optional integer payload (offending
// Fourier mode, resonant k, ...).
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what, long long payload = 0)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code),
          payload_(payload) {}

    Errc code() const { return code_; }
    long long payload() const { return payload_; }

  private:
    Errc code_;
    long long payload_;
};

}  // namespace qpsl2
