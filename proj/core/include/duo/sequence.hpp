#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duo {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

/// Throws ValidationError unless every symbol is below `alphabet_size`.
void check_alphabet(std::span<const Symbol> s, std::size_t alphabet_size, std::string_view what);

/// Number of positions holding `symbol`.
std::size_t count_symbol(std::span<const Symbol> s, Symbol symbol);

/// (number of 1s) mod 2.
inline Symbol ones_parity(std::span<const Symbol> s) {
    return static_cast<Symbol>(count_symbol(s, 1) & 1u);
}

/// Elementwise XOR of two binary sequences of equal length.
Sequence xor_mask(std::span<const Symbol> z, std::span<const Symbol> w);

/// Parses "0,1,2", "0 1 2" or "012" into a sequence. With commas present the
/// tokens are decimal numbers; otherwise every digit is one symbol and
/// whitespace (including line breaks) is ignored.
Sequence parse_sequence(std::string_view text);

std::string format_sequence(std::span<const Symbol> s);

}  // namespace duo
