def summarize_orders(orders, *, currency="EUR", include_tax=False):
    # Orders are dicts with "price" and "quantity".
    subtotal = 0
    items = 0
    for order in orders:
        items += order["quantity"]
        subtotal += order["price"] * order["quantity"]
    if include_tax:
        subtotal *= 1.2
    summary = {"items": items, "total": round(subtotal, 2), "currency": currency}
    return summary
