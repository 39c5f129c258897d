#pragma once

#include "limitlyap/conformal.hpp"
#include "limitlyap/cycle.hpp"
#include "limitlyap/decomp.hpp"
#include "limitlyap/equiv.hpp"
#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/io.hpp"
#include "limitlyap/lyapunov.hpp"
#include "limitlyap/ode.hpp"
#include "limitlyap/pipeline.hpp"
#include "limitlyap/report.hpp"
#include "limitlyap/svg.hpp"
#include "limitlyap/system.hpp"
