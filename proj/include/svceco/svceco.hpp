#pragma once

#include "svceco/analysis.hpp"
#include "svceco/config.hpp"
#include "svceco/corrected_io.hpp"
#include "svceco/correction.hpp"
#include "svceco/dataset.hpp"
#include "svceco/dataset_io.hpp"
#include "svceco/liveness.hpp"
#include "svceco/networks.hpp"
#include "svceco/powerlaw.hpp"
#include "svceco/probe.hpp"
#include "svceco/report.hpp"
