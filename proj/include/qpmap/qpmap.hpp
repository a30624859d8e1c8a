#pragma once

// Single include for the whole toolkit.

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"
#include "qpmap/continuation.hpp"
#include "qpmap/critical_sets.hpp"
#include "qpmap/diagnostics.hpp"
#include "qpmap/fourier.hpp"
#include "qpmap/logistic.hpp"
#include "qpmap/map_family.hpp"
#include "qpmap/model_analysis.hpp"
#include "qpmap/plot_scripts.hpp"
#include "qpmap/scan.hpp"
