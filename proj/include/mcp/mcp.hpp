#pragma once

#include "mcp/model.hpp"
#include "mcp/mmd.hpp"
#include "mcp/taskgraph.hpp"
#include "mcp/patterns.hpp"
#include "mcp/perf.hpp"
#include "mcp/machine.hpp"
#include "mcp/io.hpp"
#include "mcp/hmc.hpp"
#include "mcp/rc.hpp"
#include "mcp/plan.hpp"
#include "mcp/simulate.hpp"
#include "mcp/config.hpp"
#include "mcp/report_json.hpp"
