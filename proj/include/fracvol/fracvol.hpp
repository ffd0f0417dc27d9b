#pragma once

#include "fracvol/version.hpp"
#include "fracvol/rng.hpp"
#include "fracvol/quadrature.hpp"
#include "fracvol/timeseries_io.hpp"
#include "fracvol/fbm.hpp"
#include "fracvol/volatility.hpp"
#include "fracvol/simulator.hpp"
#include "fracvol/distribution.hpp"
#include "fracvol/pricing.hpp"
#include "fracvol/params_io.hpp"
#include "fracvol/csv.hpp"
