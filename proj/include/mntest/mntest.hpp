#pragma once

#include "mntest/errors.hpp"
#include "mntest/normal.hpp"
#include "mntest/counts.hpp"
#include "mntest/random.hpp"
#include "mntest/statistics.hpp"
#include "mntest/neighborhood.hpp"
#include "mntest/moments.hpp"
#include "mntest/simlab.hpp"
#include "mntest/format.hpp"
#include "mntest/experiment_io.hpp"
#include "mntest/corpus.hpp"
