"""Edge eigenvalues and eigenvectors of random regular graphs: samplers, Green functions, statistics."""
