#pragma once

#include <optional>
#include <string_view>

namespace octic {

/// Deliberate defects used to confirm that the verification suites catch
/// real bugs. Production code never enables them.
enum class Fault {
  None,
  RhoESign,      ///< rho_E(r) returned with the wrong sign
  UnsharedE,     ///< second E doublet component uses its own (scaled) weights
};

void set_fault(Fault f);
Fault active_fault();

/// CLI spelling: none, rho-e-sign, unshared-e.
std::optional<Fault> parse_fault(std::string_view name);

/// Enables a fault for the lifetime of the guard.
class ScopedFault {
 public:
  explicit ScopedFault(Fault f) : previous_(active_fault()) { set_fault(f); }
  ~ScopedFault() { set_fault(previous_); }
  ScopedFault(const ScopedFault&) = delete;
  ScopedFault& operator=(const ScopedFault&) = delete;

 private:
  Fault previous_;
};

}  // namespace octic
