#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "nessqfi/transfer.hpp"

namespace nessqfi::cli {

enum class ScanKind { chi_vs_delta, xi_vs_eta_rational, xi_n_vs_n, f_lambda_nonpert, validity_report, isotropic_check };
enum class OutputFormat { csv, json };

ScanKind parse_scan_kind(std::string_view label);
std::string_view to_string(ScanKind kind);

struct NRange {
    int first = 0;
    int last = 0;
    int step = 1;
};

/// Everything that determines a scan's output. Two equal specs give byte-identical data files.
struct ScanSpec {
    ScanKind kind = ScanKind::chi_vs_delta;
    std::optional<NRange> n_range;             ///< kind-specific default when empty
    std::vector<double> deltas;                ///< irrational-pathway anisotropies
    std::optional<RationalEta> eta_rational;
    std::vector<double> lambda_over_j;
    double mu = 1.0;
    int p_max = 0;                             ///< 0 selects the kind default
    int q_max = 0;                             ///< 0 means q_max = p_max
    XiMethod xi_method = XiMethod::jordan;
    OutputFormat format = OutputFormat::csv;
    std::string out_path;
    LogMode log_mode = LogMode::automatic;
    int threads = 1;
};

/// Spec with every kind-specific default filled in; this is what the manifest echoes.
ScanSpec resolve_defaults(const ScanSpec& spec);

nlohmann::json spec_to_json(const ScanSpec& spec);

/// A value serialized as a CSV cell / JSON field. Empty means "not representable".
using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    int failures = 0;   ///< rows whose status column is not "ok"
};

/// Evaluates the resolved spec on its grid with `spec.threads` workers; rows keep grid order.
Table run_scan(const ScanSpec& spec);

struct RationalPoint {
    int p = 2;
    int q = 1;
    double delta = 0.0;
};

/// All coprime (p, q) with 0 < q < p ≤ p_max and q ≤ q_max, ordered by (p, q).
std::vector<RationalPoint> rational_grid(int p_max, int q_max);

/// RFC 4180 CSV with a header row and '.' decimals.
std::string to_csv(const Table& table);

/// {"manifest": ..., "rows": [{column: value, ...}, ...]}.
std::string render_json(const Table& table, const nlohmann::json& manifest);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Version string fixed at configure time (git describe when available).
std::string_view tool_version();

/// Manifest without wall-clock fields: spec echo, version, failure count.
nlohmann::json data_manifest(const ScanSpec& spec, const Table& table);

/// Side manifest: data_manifest plus output digest and wall time.
nlohmann::json emit_manifest(const ScanSpec& spec, const Table& table, const std::string& output_bytes,
                             double wall_seconds);

/// Entry point used by the ness_qfi tool; returns the process exit code.
int run_cli(int argc, char** argv);

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;

} // namespace nessqfi::cli
