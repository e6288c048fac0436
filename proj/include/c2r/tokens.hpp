#pragma once

#include <cstddef>
#include <string_view>

namespace c2r {

/// Model-agnostic token estimate: the number of maximal runs of identifier
/// characters (letters, digits, '_') plus maximal runs of other non-space
/// characters. "a+=b1;" counts 4: a, +=, b1, ;.
std::size_t estimate_tokens(std::string_view text);

} // namespace c2r
