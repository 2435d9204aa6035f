#pragma once

#include <gsl/gsl_errno.h>

namespace lobforge::detail {

// GSL aborts on errors by default; every caller here checks status codes instead.
inline void gsl_quiet() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

}  // namespace lobforge::detail
