#pragma once

#include "btgen/error.hpp"
#include "btgen/expr.hpp"
#include "btgen/library.hpp"
#include "btgen/metrics.hpp"
#include "btgen/record.hpp"
#include "btgen/scenario.hpp"
#include "btgen/simulator.hpp"
#include "btgen/synth/oracle.hpp"
#include "btgen/synth/policy.hpp"
#include "btgen/synth/remote.hpp"
#include "btgen/synth/search.hpp"
#include "btgen/synth/state.hpp"
#include "btgen/tick.hpp"
#include "btgen/tree.hpp"
#include "btgen/validate.hpp"
#include "btgen/xml.hpp"
