#pragma once

#include "ambit/attribution/reports.hpp"
#include "ambit/attribution/treeshap.hpp"
#include "ambit/eval/holdout.hpp"
#include "ambit/eval/metrics.hpp"
#include "ambit/eval/seeds.hpp"
#include "ambit/experiment/bench.hpp"
#include "ambit/experiment/config.hpp"
#include "ambit/experiment/data.hpp"
#include "ambit/experiment/fullmatrix.hpp"
#include "ambit/experiment/presets.hpp"
#include "ambit/experiment/report.hpp"
#include "ambit/gbt/booster.hpp"
#include "ambit/gbt/objective.hpp"
#include "ambit/glm/count_models.hpp"
#include "ambit/glm/design.hpp"
#include "ambit/glm/irls.hpp"
#include "ambit/od/features.hpp"
#include "ambit/od/filter.hpp"
#include "ambit/od/flows.hpp"
#include "ambit/od/impedance.hpp"
#include "ambit/od/ingest.hpp"
#include "ambit/od/masses.hpp"
#include "ambit/od/split.hpp"
#include "ambit/od/synthetic.hpp"
#include "ambit/od/time.hpp"
#include "ambit/od/zones.hpp"
#include "ambit/residual/ambit.hpp"
#include "ambit/residual/models.hpp"
#include "ambit/residual/task.hpp"
#include "ambit/spatial/constrained.hpp"
#include "ambit/spatial/gravity.hpp"
#include "ambit/spatial/ipf.hpp"
#include "ambit/spatial/opportunity.hpp"
#include "ambit/spatial/tuning.hpp"
