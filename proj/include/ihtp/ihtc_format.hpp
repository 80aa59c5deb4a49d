#pragma once

#include <string>

#include "ihtp/model.hpp"

namespace ihtp {

// Ingestion adapter for the official IHTC-2024 instance schema (0-based days,
// flattened workload arrays, official weight key names). Key-name mapping
// lives entirely here; the core only ever sees the canonical format.
bool looks_like_official_instance(const std::string& bytes);
std::string official_to_canonical(const std::string& bytes);

// Parses either format, converting the official one first.
Instance parse_instance_auto(const std::string& bytes);

}  // namespace ihtp
