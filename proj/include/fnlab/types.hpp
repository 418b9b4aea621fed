#ifndef FNLAB_TYPES_HPP
#define FNLAB_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fnlab {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// Error hierarchy. Everything the library throws derives from Error so the
// CLI can catch a single type and prefix file context.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, long line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

struct DivergenceError : Error {
  DivergenceError(long iteration, double eta)
      : Error("training diverged at iteration " + std::to_string(iteration) +
              " (eta=" + std::to_string(eta) + ")"),
        iteration_(iteration),
        eta_(eta) {}
  long iteration() const { return iteration_; }
  double eta() const { return eta_; }

 private:
  long iteration_;
  double eta_;
};

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix_seed(base);
  h = mix_seed(h ^ a);
  h = mix_seed(h ^ b);
  h = mix_seed(h ^ c);
  return h;
}

}  // namespace fnlab

#endif  // FNLAB_TYPES_HPP
