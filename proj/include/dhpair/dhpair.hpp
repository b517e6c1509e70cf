#pragma once

#include "dhpair/linalg.hpp"
#include "dhpair/region.hpp"
#include "dhpair/pencil.hpp"
#include "dhpair/dh.hpp"
#include "dhpair/result.hpp"
#include "dhpair/sdp.hpp"
#include "dhpair/fgm.hpp"
#include "dhpair/bcd.hpp"
#include "dhpair/bench.hpp"
#include "dhpair/io.hpp"
