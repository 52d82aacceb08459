#include "locdens/errors.hpp"

namespace locdens {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::empty_window: return "EmptyWindow";
    case Errc::max_iter_exceeded: return "MaxIterExceeded";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::non_finite_integrand: return "NonFiniteIntegrand";
    case Errc::singular_update: return "SingularUpdate";
    case Errc::derivative_unavailable: return "DerivativeUnavailable";
    case Errc::oscillation_too_large: return "OscillationTooLarge";
    case Errc::epsilon_too_large: return "EpsilonTooLarge";
    case Errc::window_mass_one: return "WindowMassOne";
    case Errc::z_exceeds_g2_over_4: return "ZExceedsG2Over4";
    case Errc::phi1_too_large: return "Phi1TooLarge";
    case Errc::infeasible_bandwidth: return "InfeasibleBandwidth";
    case Errc::no_feasible_bandwidth: return "NoFeasibleBandwidth";
    case Errc::insufficient_cells: return "InsufficientCells";
    case Errc::cell_skipped: return "CellSkipped";
    case Errc::bad_input: return "BadInput";
  }
  return "UnknownError";
}

}  // namespace locdens
