#pragma once

#include <zecap/capacity.hpp>
#include <zecap/codec.hpp>
#include <zecap/coupled.hpp>
#include <zecap/errors.hpp>
#include <zecap/machine.hpp>
#include <zecap/oracle.hpp>
#include <zecap/report.hpp>
#include <zecap/spectral.hpp>
