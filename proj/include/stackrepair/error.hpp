#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stackrepair {

enum class Errc {
  malformed_xml,
  unknown_block_type,
  unknown_material,
  bad_rotation,
  level_out_of_bounds,
  spec_mismatch,
  io_error,
  bad_magic,
  dimension_mismatch,
  invalid_level,
  not_stable_input,
  already_stable,
  unpaired_files,
};

std::string_view to_string(Errc code) noexcept;

/// Exception type thrown by every fallible operation in the library.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace stackrepair
