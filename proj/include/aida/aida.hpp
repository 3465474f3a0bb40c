#pragma once

#include "aida/analysis.hpp"
#include "aida/dataset.hpp"
#include "aida/detector.hpp"
#include "aida/errors.hpp"
#include "aida/explain.hpp"
#include "aida/generators.hpp"
#include "aida/isolation.hpp"
#include "aida/metric.hpp"
#include "aida/model_io.hpp"
#include "aida/reports.hpp"
#include "aida/svg.hpp"
