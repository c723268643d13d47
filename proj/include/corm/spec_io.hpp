#pragma once

#include "corm/core.hpp"
#include "corm/expcorm.hpp"
#include "corm/integrability.hpp"
#include "corm/sim.hpp"
#include "corm/tails.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace corm::io {

// ---------------------------------------------------------------------------
// Spec files (JSON; schema documented in the README)
// ---------------------------------------------------------------------------

CormSpec parse_spec_json(const std::string& text);
CormSpec load_spec_file(const std::string& path);

std::string read_file(const std::string& path);

// Write-to-temp-then-rename so report files appear atomically.
void write_file_atomic(const std::string& path, const std::string& contents);

// Shortest round-trip decimal form of a double (deterministic bytes).
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::string spec_path;
    std::string spec_hash; // fnv1a64 of the spec file bytes
    std::string tool_version;
    std::uint64_t seed = 0;
    quad::QuadConfig quad;
    std::string timestamp; // ISO-8601 UTC; the only non-reproducible field
};

std::string manifest_json(const RunManifest& m);
std::string current_utc_timestamp();

// ---------------------------------------------------------------------------
// Report serializers (field names and column orders documented in README)
// ---------------------------------------------------------------------------

std::string verdict_report_json(const CormSpec& spec,
                                const integrability::CormVerdict& verdict);

struct TailTableRow {
    double y, u_star, u_j, ratio;
};
std::string tail_table_csv(const std::vector<TailTableRow>& rows);

std::string index_transfer_json(const tails::IndexTransferReport& report);

std::string derivative_report_csv(const expcorm::DerivativeReport& report);

std::string draw_csv(const sim::CormDraw& draw);

std::string sim_report_csv(const sim::SimReport& report);

} // namespace corm::io
