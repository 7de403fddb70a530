#ifndef PARAGRAM_TEXT_HPP_
#define PARAGRAM_TEXT_HPP_

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paragram {

// Splits on runs of spaces and tabs; never yields empty fields.
std::vector<std::string> split_whitespace(std::string_view text);

// Splits on every TAB, keeping empty fields.
std::vector<std::string> split_tabs(std::string_view line);

std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

// ASCII-only lowercasing; bytes >= 0x80 pass through untouched.
std::string to_lower_ascii(std::string_view text);

// Decodes UTF-8 into code points. Invalid sequences decode byte-by-byte so
// that every input has a well-defined character length.
std::u32string decode_utf8(std::string_view text);

// Reads one line, stripping the LF and a trailing CR. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

// Strict numeric parsing of a whole field. Throws DataError naming `what`.
double parse_real(std::string_view field, std::string_view what);
long long parse_integer(std::string_view field, std::string_view what);
std::optional<long long> try_parse_integer(std::string_view field);

// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace paragram

#endif  // PARAGRAM_TEXT_HPP_
