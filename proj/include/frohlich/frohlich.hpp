#pragma once

#include "frohlich/analysis/contour.hpp"
#include "frohlich/analysis/critical.hpp"
#include "frohlich/analysis/feasibility.hpp"
#include "frohlich/analysis/scaling_fit.hpp"
#include "frohlich/analysis/scan.hpp"
#include "frohlich/analysis/validity.hpp"
#include "frohlich/core/config.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/core/rates.hpp"
#include "frohlich/core/spectrum.hpp"
#include "frohlich/io/config_parser.hpp"
#include "frohlich/io/csv.hpp"
#include "frohlich/io/manifest.hpp"
#include "frohlich/io/presets.hpp"
#include "frohlich/quantum/compare.hpp"
#include "frohlich/quantum/density_matrix.hpp"
#include "frohlich/quantum/lindblad.hpp"
#include "frohlich/quantum/mcwf.hpp"
#include "frohlich/quantum/steady_state.hpp"
#include "frohlich/rate/integrate.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"
#include "frohlich/version.hpp"
