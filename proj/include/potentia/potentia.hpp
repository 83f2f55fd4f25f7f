#ifndef POTENTIA_POTENTIA_HPP
#define POTENTIA_POTENTIA_HPP

#include "potentia/core.hpp"
#include "potentia/document.hpp"
#include "potentia/dot.hpp"
#include "potentia/graph.hpp"
#include "potentia/matrix.hpp"
#include "potentia/psa.hpp"
#include "potentia/sampling.hpp"
#include "potentia/topos.hpp"
#include "potentia/valuations.hpp"

#endif
