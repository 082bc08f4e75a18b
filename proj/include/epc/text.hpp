#ifndef EPC_TEXT_HPP_
#define EPC_TEXT_HPP_

#include <string>
#include <string_view>

namespace epc {

// Byte-level helpers. Case folding is ASCII-only; bytes >= 0x80 (UTF-8
// sequences) pass through unchanged and count as word characters.

bool is_space_byte(char c);
bool is_word_byte(char c);
char ascii_lower(char c);

// Case-fold, trim, and collapse internal whitespace runs to a single space.
std::string normalize_surface(std::string_view s);

std::string trim(std::string_view s);

// Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(std::string_view data);

}  // namespace epc

#endif  // EPC_TEXT_HPP_
