// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gputrace {

enum class ErrorKind {
  InvalidArgument,
  BackendUnavailable,
  UnknownDevice,
  ReadFailure,
  InvalidReading,
  OutputNotWritable,
  SamplerStopped,
  SpawnFailure,
  NoSuchProcess,
  MissingFile,
  SchemaMismatch,
  CorruptRow,
  NoMarkers,
  DegenerateInput,
  NonPositiveInput,
  PeakExceedsCapacity,
  EmptySession,
};

std::string_view to_string(ErrorKind kind);

/// Every failure surfaced by the library. The kind lets callers (the CLI in
/// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gputrace
