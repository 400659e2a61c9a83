// Expected model for WeatherLocation in samples/weather.http.
{
    let mut m = HttpMessage::new(
        "WeatherLocation",
        AbstractUrl::new(
            Value::literal("http://www.dataservice.accuweather.com"),
            Value::literal("locations/v1/cities/search"),
        ),
        RequestMethod::Get,
    );
    m.query = vec![
        Parameter::new(Value::literal("apikey"), Value::input("apiKeyParam")),
        Parameter::new(Value::literal("q"), Value::input("city")),
        Parameter::new(Value::literal("language"), Value::literal("en-US")),
    ];
    m
}
