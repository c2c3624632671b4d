#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slitkit/rational.hpp"

namespace slitkit {

inline constexpr int kSchemaVersion = 1;

enum class FieldType { Int, Real, Bool, Text, Choice, Reals, Ints, Rationals, OptionalReal };

struct ConfigField {
    std::string key;
    FieldType type;
    std::string fallback;                // default shared by every kind
    std::string help;
    std::vector<std::string> choices;    // Choice only
    double min = -1e300, max = 1e300;    // numeric bounds (each entry for lists)
};

/// Every recognised key in file order.
const std::vector<ConfigField>& config_schema();

/// Experiment kinds accepted by `kind`.
const std::vector<std::string>& experiment_kinds();

/// `key = value` experiment description. Values are stored as canonical text,
/// so serialize() followed by parse() reproduces the same config.
class ExperimentConfig {
public:
    /// All keys at the defaults of `kind`.
    static ExperimentConfig defaults(const std::string& kind = "rates");
    /// Lines `key = value`; `#` starts a comment. The kind is read first and
    /// selects the defaults; unknown keys and malformed values raise
    /// ConfigInvalid listing every offending field.
    static ExperimentConfig parse(std::string_view text);

    std::string serialize() const;
    /// FNV-1a 64 of serialize().
    std::uint64_t hash() const;
    std::string hash_hex() const;

    /// Canonicalises and validates one value; throws ConfigInvalid.
    void set(const std::string& key, const std::string& value);
    const std::string& raw(const std::string& key) const;

    std::string kind() const { return raw("kind"); }
    long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    const std::string& get_text(const std::string& key) const { return raw(key); }
    std::vector<double> get_reals(const std::string& key) const;
    std::vector<long> get_ints(const std::string& key) const;
    std::vector<Rational> get_rationals(const std::string& key) const;
    /// false when the value is empty.
    bool has_value(const std::string& key) const { return !raw(key).empty(); }

    /// Cross-field checks (geometry against n, list lengths, ordering).
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

private:
    std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace slitkit
