// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/error.hpp"

namespace gputrace {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::UnknownDevice: return "UnknownDevice";
    case ErrorKind::ReadFailure: return "ReadFailure";
    case ErrorKind::InvalidReading: return "InvalidReading";
    case ErrorKind::OutputNotWritable: return "OutputNotWritable";
    case ErrorKind::SamplerStopped: return "SamplerStopped";
    case ErrorKind::SpawnFailure: return "SpawnFailure";
    case ErrorKind::NoSuchProcess: return "NoSuchProcess";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::CorruptRow: return "CorruptRow";
    case ErrorKind::NoMarkers: return "NoMarkers";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::PeakExceedsCapacity: return "PeakExceedsCapacity";
    case ErrorKind::EmptySession: return "EmptySession";
  }
  return "Unknown";
}

}  // namespace gputrace
