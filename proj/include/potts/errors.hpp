#pragma once

#include <stdexcept>
#include <string>

namespace potts {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct non_symmetric : error { using error::error; };
struct bad_boundaries : error { using error::error; };
struct quadrature_failure : error { using error::error; };
struct wrong_variant : error { using error::error; };
struct length_mismatch : error { using error::error; };
struct budget_exceeded : error { using error::error; };
struct empty_constraint_set : error { using error::error; };
struct degenerate_covariance : error { using error::error; };
struct non_monotone_q : error { using error::error; };
struct not_psd : error { using error::error; };
struct config_invalid : error { using error::error; };
struct suite_unknown : error { using error::error; };
struct task_failed : error { using error::error; };

}  // namespace potts
