#pragma once

#include "ubssd/arfit.hpp"
#include "ubssd/isa.hpp"
#include "ubssd/types.hpp"

#include <filesystem>

namespace ubssd {

// Headerless CSV, one row per channel. Values are printed with enough digits
// to round-trip exactly.
void save_csv(const TimeSeries& x, const std::filesystem::path& path);
TimeSeries load_csv(const std::filesystem::path& path);

// Binary series: magic "BSSD", version u16, dim u32, len u32, then
// little-endian f64 column-major. Bit-exact round trip.
void save_binary(const TimeSeries& x, const std::filesystem::path& path);
TimeSeries load_binary(const std::filesystem::path& path);

// AR model cache, magic "ARMD".
void save_ar_model(const ArModel& m, const std::filesystem::path& path);
ArModel load_ar_model(const std::filesystem::path& path);

// ISA result cache, magic "ISAR".
void save_isa_result(const IsaResult& r, const std::filesystem::path& path);
IsaResult load_isa_result(const std::filesystem::path& path);

}  // namespace ubssd
