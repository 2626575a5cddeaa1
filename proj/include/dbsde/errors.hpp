#pragma once

#include <stdexcept>
#include <string>

namespace dbsde {

// Invalid parameters, grids, or option combinations. CLI exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Root finding or other numerical procedure failed to converge. CLI exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problem data violates a model requirement (e.g. barrier ordering). CLI exit code 4.
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure; carries the destination path in the message.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dbsde
