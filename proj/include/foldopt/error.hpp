#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace foldopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input data.
class InputError : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::size_t vertex, double time)
      : Error("simulation diverged at vertex " + std::to_string(vertex) + " (t = " +
              std::to_string(time) + " s)"),
        vertex_(vertex),
        time_(time) {}

  std::size_t vertex() const { return vertex_; }
  double time() const { return time_; }

 private:
  std::size_t vertex_;
  double time_;
};

}  // namespace foldopt
