#ifndef GAUGE_POLYMER_ERRORS_HPP
#define GAUGE_POLYMER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gauge_polymer {

/** \brief Parameter outside the domain where a quantity is defined (bad beta*, beta < 0, ...). */
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/** \brief An enumeration hit its node budget before finishing. */
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/** \brief The window is too small for the requested cutoff. */
class MarginError : public std::runtime_error {
 public:
  explicit MarginError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_ERRORS_HPP
