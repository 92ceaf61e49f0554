#pragma once

#include "spinn/collocation.hpp"

#include <span>
#include <string>

namespace spinn {

enum class RecordFormat { Csv, Json };

/// Columns: step,t,loss,l2_error,F_x,F_y,F_z,beta_x,beta_y,beta_z,x_L,N,
/// epochs,wall_ms. NaN fields (unused dimensions) serialize as empty cells;
/// floating point uses 17 significant digits.
std::string records_to_csv(std::span<const StepRecord> records);
std::string records_to_json(std::span<const StepRecord> records);
std::vector<StepRecord> records_from_csv(const std::string& text);

void emit_records(std::span<const StepRecord> records, RecordFormat format,
                  const std::string& path);

}  // namespace spinn
