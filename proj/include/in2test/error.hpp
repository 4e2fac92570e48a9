#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace in2test {

/// Malformed or inconsistent input data (CSV/JSON rows, duplicate records).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selection rule text that does not follow the rule grammar.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A rule references a metric that is not available for some part.
class MissingMetricError : public std::runtime_error {
 public:
  MissingMetricError(std::string part_id, std::string metric)
      : std::runtime_error("part '" + part_id + "' has no value for metric '" + metric + "'"),
        part_id_(std::move(part_id)),
        metric_(std::move(metric)) {}

  const std::string& part_id() const noexcept { return part_id_; }
  const std::string& metric() const noexcept { return metric_; }

 private:
  std::string part_id_;
  std::string metric_;
};

}  // namespace in2test
