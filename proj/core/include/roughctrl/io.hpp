#pragma once

#include "roughctrl/filter.hpp"

namespace roughctrl {

inline constexpr const char* kVersionString = "roughctrl 0.1.0";

// 17 significant digits: doubles round-trip exactly
std::string format_float(double x);

// CSV with header t,x1,...,xd (or the provided column names)
void write_path_csv(const std::string& file, const SampledPath& path,
                    const std::vector<std::string>& names = {});
SampledPath read_path_csv(const std::string& file);

// lift JSON: {p, geometric, times, values, second_level_steps}; second-level
// steps row-major d x d per grid step
void write_lift_json(const std::string& file, const RoughPath& rp);
RoughPath read_lift_json(const std::string& file);

// rows: t, state coordinates, value, best-control coordinates
void write_field_csv(const std::string& file, const ValueField& field,
                     const std::vector<std::string>& axis_names = {});

// model JSON: dims plus parameter entries that are scalars, matrices
// (nested arrays), or {times, samples} trajectories
FilterModel read_filter_model(const std::string& file);
FilterModel parse_filter_model(const std::string& json_text);

// every run writes one of these next to its outputs; params are
// pre-formatted key/value pairs
void write_manifest(const std::string& file, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& params,
                    const std::vector<std::string>& outputs);

}  // namespace roughctrl
