#ifndef LEVY_EPIDEMIC_ERRORS_HPP
#define LEVY_EPIDEMIC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace levy_epi {

/// A stability criterion was asked about parameters outside its hypotheses.
class NotApplicableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No Lyapunov constants exist because the stability condition fails.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear solve failed or was too ill-conditioned to trust.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// Bad or missing experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_ERRORS_HPP
