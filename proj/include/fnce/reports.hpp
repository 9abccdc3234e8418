#pragma once

#include <string>

#include "fnce/metrics.hpp"
#include "fnce/trainer.hpp"

namespace fnce {

// step,loss,mean_sp,mean_sn,alignment,uniformity with one row per logged
// step. Reals rendered %.17g so reruns diff bit-for-bit.
std::string trace_csv(const TrainTrace& trace);

// layer,param,row,col,value covering every weight and bias; value %.17g, so
// a reloaded head is bit-identical.
std::string head_csv(const ProjectionHead& head);
ProjectionHead parse_head_csv(const std::string& text, const std::string& origin);
ProjectionHead read_head_csv(const std::string& path);

// Single-row spearman,alignment,uniformity,n_pairs report.
std::string eval_csv(const EvalReport& rep);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace fnce
