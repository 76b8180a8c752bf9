#pragma once

#include "ridecomfort/config.hpp"
#include "ridecomfort/error.hpp"
#include "ridecomfort/index.hpp"
#include "ridecomfort/ingest.hpp"
#include "ridecomfort/io.hpp"
#include "ridecomfort/logit.hpp"
#include "ridecomfort/report.hpp"
#include "ridecomfort/signal.hpp"
#include "ridecomfort/synthgen.hpp"
