#pragma once

#include "equilibrate/cfr.hpp"
#include "equilibrate/efg.hpp"
#include "equilibrate/games.hpp"
#include "equilibrate/harness.hpp"
#include "equilibrate/minimizers.hpp"
#include "equilibrate/nfg.hpp"
#include "equilibrate/rt_nfg.hpp"
