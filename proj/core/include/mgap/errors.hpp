#pragma once

#include <stdexcept>
#include <string>

namespace mgap {

enum class Errc {
  zero_vector,
  dimension_mismatch,
  too_few_vectors,
  invalid_variance,
  not_unit_norm,
  convergence_failure,
  angle_out_of_range,
  dim_too_small,
  invalid_spec,
  invalid_cos,
  precondition_violated,
  invalid_sigma,
  invalid_temperature,
  empty_batch,
  invalid_config,
  divergence_detected,
  not_found,
  parse_error,
  io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace mgap
