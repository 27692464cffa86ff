#include "cyclestab/maps.hpp"

#include <algorithm>
#include <cctype>

#include "cyclestab/errors.hpp"

namespace cyclestab {

std::string state_to_string(const State& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + s[i].to_string();
    return out + ")";
}

MapDef::MapDef(std::string name, int dimension, std::vector<std::string> param_names,
               std::vector<BigDec> param_values, std::shared_ptr<const MapKernel> kernel, GridFn grid,
               std::vector<Preset> presets, std::size_t default_preset, std::optional<Box> hint)
    : name_(std::move(name)),
      dim_(dimension),
      pnames_(std::move(param_names)),
      pvalues_(std::move(param_values)),
      kernel_(std::move(kernel)),
      grid_(std::move(grid)),
      presets_(std::move(presets)),
      default_preset_(default_preset),
      hint_(std::move(hint)) {
    if (dim_ != 1 && dim_ != 2) throw ValidationError("map '" + name_ + "': dimension must be 1 or 2");
    if (pnames_.size() != pvalues_.size()) throw ValidationError("map '" + name_ + "': parameter table mismatch");
    if (presets_.empty()) throw ValidationError("map '" + name_ + "': needs at least one preset");
    if (default_preset_ >= presets_.size()) throw ValidationError("map '" + name_ + "': bad default preset");
}

BigDec MapDef::parameter(std::string_view name) const {
    for (std::size_t i = 0; i < pnames_.size(); ++i)
        if (pnames_[i] == name) return pvalues_[i];
    throw ValidationError("map '" + name_ + "' has no parameter '" + std::string(name) + "'");
}

std::vector<State> MapDef::initial_grid(int count) const {
    if (count < 0) count = default_preset().grid_size;
    if (count == 0) throw ValidationError("initial grid must contain at least one state");
    return grid_(pvalues_, count);
}

std::optional<Preset> MapDef::preset_for(int period) const {
    for (const auto& p : presets_)
        if (p.period == period) return p;
    return std::nullopt;
}

MapDef MapDef::with_parameters(const std::map<std::string, BigDec>& overrides) const {
    MapDef copy = *this;
    for (const auto& [k, v] : overrides) {
        auto it = std::find(pnames_.begin(), pnames_.end(), k);
        if (it == pnames_.end()) throw ValidationError("map '" + name_ + "' has no parameter '" + k + "'");
        copy.pvalues_[static_cast<std::size_t>(it - pnames_.begin())] = v;
    }
    return copy;
}

State MapDef::step(const State& s) const {
    if (static_cast<int>(s.size()) != dim_)
        throw ValidationError("state dimension " + std::to_string(s.size()) + " does not match map '" + name_ + "'");
    try {
        return kernel_->step(pvalues_, s);
    } catch (const OverflowError& e) {
        throw DivergenceError(name_ + ": trajectory escaped (" + e.what() + ")", state_to_string(s));
    }
}

SmallMatrix MapDef::jacobian(const State& s) const {
    if (static_cast<int>(s.size()) != dim_)
        throw ValidationError("state dimension " + std::to_string(s.size()) + " does not match map '" + name_ + "'");
    return kernel_->jacobian(pvalues_, s);
}

State step(const MapDef& map, const State& s) { return map.step(s); }

State iterate(const MapDef& map, const State& s, long k) {
    if (k < 1) throw ValidationError("iterate needs k >= 1");
    State r = map.step(s);
    for (long i = 1; i < k; ++i) r = map.step(r);
    return r;
}

SmallMatrix jacobian(const MapDef& map, const State& s) { return map.jacobian(s); }

std::string normalize_map_name(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == ' ' || c == '_') c = '-';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

void MapRegistry::add(MapDef map) {
    if (contains(map.name())) throw ValidationError("map '" + map.name() + "' is already registered");
    maps_.push_back(std::move(map));
}

bool MapRegistry::contains(std::string_view name) const {
    std::string key = normalize_map_name(name);
    return std::any_of(maps_.begin(), maps_.end(), [&](const MapDef& m) { return normalize_map_name(m.name()) == key; });
}

const MapDef& MapRegistry::find(std::string_view name) const {
    std::string key = normalize_map_name(name);
    for (const auto& m : maps_)
        if (normalize_map_name(m.name()) == key) return m;
    throw ValidationError("unknown map '" + std::string(name) + "'");
}

}  // namespace cyclestab
