// Exception types shared by every module. The CLI maps InvalidInput to
// exit code 2 and NumericalError to exit code 3.
#ifndef SMF_ERRORS_HPP
#define SMF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smf {

class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A row of a count matrix sums to zero and cannot be normalized.
class EmptyRow : public InvalidInput {
 public:
  explicit EmptyRow(std::size_t index)
      : InvalidInput("row " + std::to_string(index) + " sums to zero"), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A factor was required to have full row rank and does not.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class RankDeficient : public NumericalError {
 public:
  RankDeficient(std::size_t rank, std::size_t expected)
      : NumericalError("matrix has rank " + std::to_string(rank) + ", expected " +
                       std::to_string(expected)),
        rank_(rank) {}
  std::size_t rank() const { return rank_; }

 private:
  std::size_t rank_;
};

/// Some factor index has empty support in W or in H.
class DegenerateFactor : public InvalidInput {
 public:
  explicit DegenerateFactor(const std::string& what) : InvalidInput(what) {}
};

}  // namespace smf

#endif  // SMF_ERRORS_HPP
