"""Values produced by tests/oracles.py, frozen before the implementation was
tested against them.  test_oracles.py checks they still regenerate."""

FROZEN = {
    'coeffs_0.25_0.01': (19.289216925627496, 0.000180700877854209, 2.401229748590257, 2.4015911503459657, 4.216324383701844e-09, 1.7027677793032625),
    'coeffs_0.25_0.1': (8.217230924591842, 0.010157645755729909, 2.381299539252486, 2.4016148307639456, 2.3684634304327066e-05, 1.7027677793032625),
    'coeffs_0.25_0.5': (3.5046525643022286, 0.16824400100250514, 2.0747476212987856, 2.4112356233037957, 0.00964447717415439, 1.7027677793032625),
    'coeffs_0.5_0.01': (37.74324166580897, 0.0006666642857193362, 2.4334204520223923, 2.434753780593831, 1.4285562771396102e-08, 1.9449880932484427),
    'coeffs_0.5_0.1': (10.392352306482492, 0.021074323432165788, 2.392650246952127, 2.4347988938164584, 4.5127508190340914e-05, 1.9449880932484427),
    'coeffs_0.5_0.5': (3.400095915301355, 0.23360889961641315, 1.979832632487407, 2.4470504317202333, 0.012296665411965066, 1.9449880932484427),
    'coeffs_1.0_0.01': (199.3633802276324, 0.009999972222277777, 2.8163033744857016, 2.836303318930257, 1.6666500000892854e-07, 2.98432245116892),
    'coeffs_1.0_0.1': (19.36338022763242, 0.09997222777706923, 2.636525196800373, 2.8364696523545114, 0.00016650008925449044, 2.98432245116892),
    'coeffs_1.0_0.5': (3.3633802276324185, 0.49654508364762423, 1.8635323997946114, 2.8566225670898597, 0.020319414824603022, 2.98432245116892),
    'coeffs_1.5_0.01': (1333.0938838371665, 0.19999966666728394, 4.215504692332099, 4.6155040256666675, 1.999981481577635e-06, 6.625783193123724),
    'coeffs_1.5_0.1': (41.9242526394115, 0.6323501422961564, 3.3514336113218937, 4.616133895914206, 0.0006318702290201833, 6.625783193123724),
    'coeffs_1.5_0.5': (3.5317866701613645, 1.4083482020819627, 1.8333530827724507, 4.650049486936377, 0.03454746125119011, 6.625783193123724),
    'coeffs_1.9_0.01': (6641.536668575477, 6.309570941007213, 7.835069781659399, 20.454211663673824, 1.5022665673478843e-05, 38.24016335502717),
    'coeffs_1.9_0.1': (83.49390928126465, 7.942967191435669, 4.57015190216384, 20.45608628503518, 0.0018896440270278368, 38.24016335502717),
    'coeffs_1.9_0.5': (3.808970853600538, 9.321113025899894, 1.8663378233739236, 20.50856387517371, 0.05436723416555964, 38.24016335502717),
    'theta_0.5_0.1_0.5': 0.28804833896703164,
    'theta_1.5_0.03_0.9': 0.13847343726307007,
    'ou_q_t1_0.75': 0.7053653087597509,
    'ou_q_t0.1_0.3': -0.8730758144227865,
    'ou_q_3atoms_t0.5_0.9': 1.9619590434019312,
    'rademacher_w1_10': 0.24609375,
    'rademacher_w1_101': 0.0795892373871788,
}
