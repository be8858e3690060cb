// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace gputrace::text {

std::string_view trim(std::string_view s);

/// Whole-string integer parse; rejects signs on unsigned types, trailing
/// characters and overflow.
template <typename T>
std::optional<T> parse_int(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

/// Whole-string finite double parse.
std::optional<double> parse_double(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Fixed-point with `decimals` digits.
std::string format_fixed(double value, int decimals);

/// Splits one CSV record. Quoted fields may contain commas and doubled
/// quotes. Returns nullopt on an unterminated or misplaced quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line);

/// Minimal quoting: fields containing comma, quote, CR or LF are wrapped in
/// quotes with inner quotes doubled.
std::string csv_escape(std::string_view field);

/// Splits on '\n', dropping a trailing '\r' from each line. A final empty
/// line after the last newline is not returned.
std::vector<std::string_view> split_lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace gputrace::text
