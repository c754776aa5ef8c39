// errors.hpp — Exception types thrown by spinres operations.
#pragma once

#include <stdexcept>
#include <string>

namespace spinres {

// Malformed or non-physical argument values (bad spins, even packet counts,
// unknown level labels, unsorted wavelength grids, ...).
struct invalid_input_error : std::invalid_argument {
  explicit invalid_input_error(const std::string& what)
      : std::invalid_argument(what) {}
};

// A well-posed query with no answer in the searched domain
// (e.g. a transition frequency that is never reached on the field bracket).
struct no_solution_error : std::runtime_error {
  explicit no_solution_error(const std::string& what)
      : std::runtime_error(what) {}
};

// A model was evaluated outside its declared regime of validity
// (e.g. a dispersive-readout formula with a packet resonant with the cavity).
struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace spinres
