#pragma once

#include "erwlab/environment.hpp"
#include "erwlab/literal.hpp"
#include "erwlab/stream.hpp"
#include "erwlab/periodic.hpp"
#include "erwlab/kks.hpp"
#include "erwlab/criterion.hpp"
#include "erwlab/bpm.hpp"
#include "erwlab/walk.hpp"
