#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclestab/bignum.hpp"
#include "cyclestab/matrix.hpp"

namespace cyclestab {

using State = std::vector<BigDec>;

std::string state_to_string(const State& s);

// Step rule and Jacobian given the parameter values in declaration order.
class MapKernel {
  public:
    virtual ~MapKernel() = default;
    virtual State step(const std::vector<BigDec>& p, const State& s) const = 0;
    virtual SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const = 0;
};

using GridFn = std::function<std::vector<State>(const std::vector<BigDec>& params, int count)>;

// One row of the reference experiment table.
struct Preset {
    int period = 1;
    BigDec theta;
    int grid_size = 2;
    int precision = 250;
    bool tested = true;  // false for entries the reference left commented out
};

struct Box {
    std::vector<BigDec> lower, upper;
};

class MapDef {
  public:
    MapDef() = default;
    MapDef(std::string name, int dimension, std::vector<std::string> param_names, std::vector<BigDec> param_values,
           std::shared_ptr<const MapKernel> kernel, GridFn grid, std::vector<Preset> presets, std::size_t default_preset,
           std::optional<Box> hint = std::nullopt);

    const std::string& name() const { return name_; }
    int dimension() const { return dim_; }
    const std::vector<std::string>& parameter_names() const { return pnames_; }
    const std::vector<BigDec>& parameter_values() const { return pvalues_; }
    BigDec parameter(std::string_view name) const;
    const std::vector<Preset>& presets() const { return presets_; }
    const Preset& default_preset() const { return presets_.at(default_preset_); }
    int default_period() const { return default_preset().period; }
    const BigDec& default_theta() const { return default_preset().theta; }
    const std::optional<Box>& invariant_set_hint() const { return hint_; }

    // Reference initial grid with `count` states (defaults to the default preset's size).
    std::vector<State> initial_grid(int count = -1) const;
    // Preset for period T if the reference table has one.
    std::optional<Preset> preset_for(int period) const;

    // Copy with some parameters replaced (exact values).
    MapDef with_parameters(const std::map<std::string, BigDec>& overrides) const;

    State step(const State& s) const;
    SmallMatrix jacobian(const State& s) const;

  private:
    std::string name_;
    int dim_ = 1;
    std::vector<std::string> pnames_;
    std::vector<BigDec> pvalues_;
    std::shared_ptr<const MapKernel> kernel_;
    GridFn grid_;
    std::vector<Preset> presets_;
    std::size_t default_preset_ = 0;
    std::optional<Box> hint_;
};

State step(const MapDef& map, const State& s);
State iterate(const MapDef& map, const State& s, long k);
SmallMatrix jacobian(const MapDef& map, const State& s);

// Declarative user map: expressions over coordinate and parameter identifiers.
struct UserMapSpec {
    std::string name;
    std::vector<std::string> variables;  // coordinate names, size 1 or 2
    std::vector<std::pair<std::string, BigDec>> parameters;
    std::vector<std::string> step;  // one expression per coordinate
    std::vector<State> initial_grid;
    int period = 1;
    BigDec theta = BigDec(1);
};

MapDef make_user_map(const UserMapSpec& spec);

class MapRegistry {
  public:
    // Registry pre-filled with the 13 catalog maps.
    static MapRegistry with_catalog();

    void add(MapDef map);
    // Case-insensitive; spaces and underscores match '-'. Throws ValidationError.
    const MapDef& find(std::string_view name) const;
    bool contains(std::string_view name) const;
    const std::vector<MapDef>& maps() const { return maps_; }

  private:
    std::vector<MapDef> maps_;
};

const MapRegistry& catalog();
std::string normalize_map_name(std::string_view name);

}  // namespace cyclestab
