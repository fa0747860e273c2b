#include "duo/sequence.hpp"

#include <algorithm>
#include <cctype>

#include "duo/error.hpp"

namespace duo {

void check_alphabet(std::span<const Symbol> s, std::size_t alphabet_size, std::string_view what) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] >= alphabet_size) {
            throw ValidationError(std::string(what) + ": symbol " + std::to_string(s[i]) + " at position " +
                                  std::to_string(i) + " outside alphabet of size " +
                                  std::to_string(alphabet_size));
        }
    }
}

std::size_t count_symbol(std::span<const Symbol> s, Symbol symbol) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), symbol));
}

Sequence xor_mask(std::span<const Symbol> z, std::span<const Symbol> w) {
    if (z.size() != w.size()) throw ValidationError("xor_mask: length mismatch");
    Sequence out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<Symbol>(z[i] ^ w[i]);
    return out;
}

Sequence parse_sequence(std::string_view text) {
    Sequence out;
    const bool separated = text.find(',') != std::string_view::npos;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        if (c == 'e' || c == 'E') {
            throw ValidationError("parse_sequence: write erasures as their numeric symbol (2 for a BEC)");
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ValidationError(std::string("parse_sequence: unexpected character '") + c + "'");
        }
        unsigned value = 0;
        if (separated) {
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                value = value * 10 + static_cast<unsigned>(text[pos] - '0');
                if (value > 255) throw ValidationError("parse_sequence: symbol exceeds 255");
                ++pos;
            }
        } else {
            value = static_cast<unsigned>(c - '0');
            ++pos;
        }
        out.push_back(static_cast<Symbol>(value));
    }
    return out;
}

std::string format_sequence(std::span<const Symbol> s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(s[i]);
    }
    return out;
}

}  // namespace duo
