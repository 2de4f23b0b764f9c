#pragma once

#include <stdexcept>
#include <string>

namespace xneusm {

enum class Errc {
  disconnected,
  isolated_node,
  duplicate_edge,
  self_loop,
  label_out_of_range,
  syntax_error,
  label_space_mismatch,
  unsatisfiable_stats,
  size_out_of_range,
  negative_generation_failed,
  io_error,
  shape_mismatch,
  domain_error,
  non_scalar_loss,
  degenerate_labels,
  missing_mapping,
  empty_true_pairs,
  non_finite_loss,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace xneusm
